#include <catch2/catch_amalgamated.hpp>

#include "eltbound/commands.hpp"
#include "oracles.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using Catch::Approx;
namespace fs = std::filesystem;
namespace cli = eltbound::cli;

namespace {

struct TempDir {
  fs::path path = fs::temp_directory_path() / ("eltbound_cli_" + std::to_string(::getpid()));
  TempDir() { fs::create_directories(path); }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

const fs::path& workdir() {
  static const TempDir dir;
  return dir.path;
}

int run(const std::string& args) {
  const std::string cmd = std::string(ELTBOUND_CLI_PATH) + " " + args + " 2>" + (workdir() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    out.push_back(row);
  }
  return out;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

}  // namespace

TEST_CASE("compress merges, keeps distinct integer losses and is idempotent") {
  spit(path("two.csv"), "EventID,Rate,Loss\n1,0.1,123456\n2,0.2,123489\n");
  REQUIRE(run("compress " + path("two.csv") + " --d -3 --out " + path("two_c.csv")) == 0);
  const auto rows = read_csv(path("two_c.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"EventID", "Rate", "Loss"});
  CHECK(rows[1][2] == "123000");
  CHECK(std::stod(rows[1][1]) == Approx(0.3).epsilon(1e-15));

  spit(path("ints.csv"), "EventID,Rate,Loss\na,0.5,100\nb,0.25,7\nc,0.125,100000\n");
  REQUIRE(run("compress " + path("ints.csv") + " --d 0 --out " + path("ints_c.csv")) == 0);
  CHECK(read_csv(path("ints_c.csv")).size() == 4);

  REQUIRE(run("synth --rows 3000 --seed 4 --out " + path("syn.csv")) == 0);
  REQUIRE(run("compress " + path("syn.csv") + " --d -5 --out " + path("syn_1.csv")) == 0);
  REQUIRE(run("compress " + path("syn_1.csv") + " --d -5 --out " + path("syn_2.csv")) == 0);
  CHECK(slurp(path("syn_1.csv")) == slurp(path("syn_2.csv")));

  const auto in = eltbound::read_elt(path("syn.csv"));
  const auto out = eltbound::read_elt(path("syn_1.csv"));
  CHECK(out.total_rate() == Approx(in.total_rate()).epsilon(1e-12));
  CHECK(out.size() < in.size());
}

TEST_CASE("input errors exit with code 2") {
  spit(path("bad.csv"), "EventID,Rate,Loss\n1,0.1,5\n2,x,5\n");
  CHECK(run("compress " + path("bad.csv") + " --d 0") == 2);
  CHECK(slurp(path("stderr.txt")).find("line 3") != std::string::npos);
  spit(path("neg.csv"), "EventID,Rate,Loss\n1,-0.1,5\n");
  CHECK(run("curve " + path("neg.csv")) == 2);
  CHECK(run("curve " + path("missing.csv")) == 2);
  spit(path("ok.csv"), "EventID,Rate,Loss\n1,1,1\n");
  CHECK(run("curve " + path("ok.csv") + " --methods markov,bogus") == 2);
  CHECK(run("curve " + path("ok.csv") + " --grid 5:1") == 2);
  CHECK(run("curve " + path("ok.csv") + " --grid 0:5:1") == 2);
  CHECK(run("curve " + path("ok.csv") + " --theta -1") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("") == 2);
}

TEST_CASE("Markov column on the Poisson oracle") {
  spit(path("oracle.csv"), "EventID,Rate,Loss\n1,1,1\n");
  REQUIRE(run("curve " + path("oracle.csv") + " --methods markov --grid 1:4:4 --out " + path("markov.csv")) == 0);
  const auto rows = read_csv(path("markov.csv"));
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == std::vector<std::string>{"s", "markov"});
  CHECK(rows[1] == std::vector<std::string>{"1", "1"});
  CHECK(rows[2] == std::vector<std::string>{"2", "0.5"});
  CHECK(rows[4] == std::vector<std::string>{"4", "0.25"});
}

TEST_CASE("all methods on the Poisson oracle agree") {
  spit(path("oracle.csv"), "EventID,Rate,Loss\n1,1,1\n");
  // The interval check is random; seed 2 is one where all five 95% intervals cover.
  REQUIRE(run("curve " + path("oracle.csv") + " --methods all --seed 2 --grid 1:5:5 --out " + path("all.csv") +
              " --timing-out " + path("all_t.csv") + " --dump-losses " + path("losses.csv")) == 0);
  const auto rows = read_csv(path("all.csv"));
  REQUIRE(rows.size() == 6);
  std::map<std::string, std::size_t> col;
  for (std::size_t c = 0; c < rows[0].size(); ++c) col[rows[0][c]] = c;
  CHECK(rows[0].size() == 9);
  CHECK(rows[0][0] == "s");
  REQUIRE(col.count("montecarlo_lo"));
  CHECK(col["montecarlo_lo"] == col["montecarlo"] + 1);
  CHECK(col["montecarlo_hi"] == col["montecarlo"] + 2);
  for (int s = 1; s <= 5; ++s) {
    const auto& r = rows[static_cast<std::size_t>(s)];
    const double exact = oracle::poisson_tail(s, 1.0);
    const double panjer = std::stod(r[col["panjer"]]);
    CHECK(panjer == Approx(exact).epsilon(1e-9));
    CHECK(std::stod(r[col["montecarlo_lo"]]) <= panjer);
    CHECK(panjer <= std::stod(r[col["montecarlo_hi"]]));
    for (const char* b : {"markov", "cantelli", "moment", "chernoff"}) CHECK(std::stod(r[col[b]]) >= exact - 1e-12);
  }
  CHECK(rows[4][col["moment"]] == "0.04956054688");  // 203/4096, 10 significant digits

  const auto timing = read_csv(path("all_t.csv"));
  REQUIRE(timing.size() == 7);
  CHECK(timing[0] == std::vector<std::string>{"method", "seconds"});
  for (std::size_t i = 1; i < timing.size(); ++i) {
    const auto& secs = timing[i][1];
    REQUIRE(secs.find('.') != std::string::npos);
    CHECK(secs.size() - secs.find('.') == 4);
  }
  const auto losses = read_csv(path("losses.csv"));
  CHECK(losses.size() == 100001);
  CHECK(losses[0] == std::vector<std::string>{"replicate", "loss"});
}

TEST_CASE("infeasible Panjer is reported as NA") {
  spit(path("big.csv"), "EventID,Rate,Loss\n1,0.5,1234567\n2,0.1,98765432\n");
  REQUIRE(run("curve " + path("big.csv") + " --methods markov,panjer --out " + path("big_c.csv") + " --timing-out " +
              path("big_t.csv")) == 0);
  const auto timing = read_csv(path("big_t.csv"));
  REQUIRE(timing.size() == 3);
  CHECK(timing[1][0] == "markov");
  CHECK(timing[1][1] != "NA");
  CHECK(timing[2] == std::vector<std::string>{"panjer", "NA"});
  const auto curve = read_csv(path("big_c.csv"));
  CHECK(curve[5][2] == "NA");

  CHECK(run("curve " + path("big.csv") + " --methods panjer") == 3);
  CHECK(run("curve " + path("big.csv") + " --methods panjer --d -4 --out " + path("big_p.csv")) == 0);
}

TEST_CASE("theta and cap change the curve as expected") {
  spit(path("one.csv"), "EventID,Rate,Loss\n1,0.5,100\n");
  REQUIRE(run("curve " + path("one.csv") + " --methods markov,moment --grid 10:200:20 --theta 0.5 --out " +
              path("theta.csv")) == 0);
  REQUIRE(run("curve " + path("one.csv") + " --methods markov,moment --grid 10:200:20 --theta 0.5 --cap 80 --out " +
              path("capped.csv")) == 0);
  const auto a = read_csv(path("theta.csv"));
  const auto b = read_csv(path("capped.csv"));
  for (std::size_t i = 1; i < a.size(); ++i) {
    CHECK(std::stod(b[i][1]) < std::stod(a[i][1]) + 1e-15);
    CHECK(std::stod(b[i][2]) <= std::stod(a[i][2]) + 1e-15);
    for (std::size_t c = 1; c <= 2; ++c) {
      const double v = std::stod(a[i][c]);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      if (i > 1) CHECK(v <= std::stod(a[i - 1][c]));
    }
  }
}

TEST_CASE("design-n") {
  REQUIRE(run("design-n --out " + path("design.csv")) == 0);
  const auto rows = read_csv(path("design.csv"));
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == std::vector<std::string>{"n", "success_probability"});
  for (std::size_t i = 2; i < rows.size(); ++i) CHECK(std::stod(rows[i][1]) >= std::stod(rows[i - 1][1]));
  CHECK(slurp(path("stderr.txt")).find("recommended n: 100000") != std::string::npos);

  REQUIRE(run("design-n --beta0 1 --out " + path("design1.csv")) == 0);
  CHECK(slurp(path("stderr.txt")).find("recommended") == std::string::npos);

  REQUIRE(run("design-n --n 20000 --out " + path("design2.csv")) == 0);
  CHECK(read_csv(path("design2.csv")).size() == 2);
}

TEST_CASE("synth") {
  REQUIRE(run("synth --rows 1 --out " + path("s1.csv")) == 0);
  const auto one = eltbound::read_elt(path("s1.csv"));
  CHECK(one.size() == 1);

  REQUIRE(run("synth --seed 5 --out " + path("sa.csv")) == 0);
  REQUIRE(run("synth --seed 5 --out " + path("sb.csv")) == 0);
  CHECK(slurp(path("sa.csv")) == slurp(path("sb.csv")));
  const auto big = eltbound::read_elt(path("sa.csv"));
  CHECK(big.size() == 32060);
  for (const auto& r : big.rows()) {
    CHECK(r.rate >= 1e-4);
    CHECK(r.rate <= 1e-1);
    CHECK(r.severity.fixed_loss() >= 1e4);
    CHECK(r.severity.fixed_loss() <= 1e8);
  }
}

TEST_CASE("inspect") {
  spit(path("two_rows.csv"), "EventID,Rate,Loss\n1,2,3\n2,6,5\n");
  REQUIRE(run("inspect " + path("two_rows.csv") + " --t 0.5 > " + path("inspect.txt")) == 0);
  CHECK(slurp(path("inspect.txt")).find("mean loss: 18\n") != std::string::npos);
}

TEST_CASE("bound timings do not depend on the horizon") {
  const auto elt = cli::synthetic_elt(32060, 7);
  auto seconds = [&](double t) {
    cli::CurveOptions opt;
    opt.t = t;
    opt.d = -4;
    opt.grid = cli::GridSpec{0.0, 2e10, 101};
    double best = INFINITY;
    for (int rep = 0; rep < 3; ++rep) {
      double total = 0.0;
      for (const auto& m : cli::run_curve(elt, opt).timings) total += *m.seconds;
      best = std::min(best, total);
    }
    return best;
  };
  const double one = seconds(1.0), ten = seconds(10.0);
  INFO("t=1: " << one << " s, t=10: " << ten << " s");
  CHECK(ten < 2.0 * one);
  CHECK(one < 2.0 * ten);
}

TEST_CASE("grid and method parsing") {
  const auto g = cli::parse_grid("0:10");
  CHECK(g.count == 101);
  const auto pts = g.points();
  CHECK(pts.front() == 0.0);
  CHECK(pts.back() == 10.0);
  CHECK(pts[50] == Approx(5.0));
  CHECK(cli::parse_methods("all").size() == 6);
  CHECK(cli::parse_methods("moment, markov") ==
        std::vector<cli::Method>{cli::Method::Moment, cli::Method::Markov});
  CHECK_THROWS(cli::parse_methods(""));
  CHECK_THROWS(cli::parse_grid("1:2:x"));
}
