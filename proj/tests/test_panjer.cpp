#include <catch2/catch_amalgamated.hpp>

#include "eltbound/panjer.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using Catch::Approx;
using namespace eltbound;

namespace {

EventLossTable int_table(const std::vector<oracle::IntRow>& rows) {
  std::vector<EltRow> out;
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.push_back({std::to_string(i), rows[i].rate, Severity::point_mass(rows[i].loss)});
  return EventLossTable(std::move(out));
}

PanjerConfig up_to(long long s_max) {
  PanjerConfig cfg;
  cfg.s_max = s_max;
  return cfg;
}

}  // namespace

TEST_CASE("single unit loss recovers the Poisson pmf") {
  const auto r = panjer_exceedance(int_table({{1.0, 1}}), 1.0, up_to(5));
  for (int k = 0; k <= 5; ++k) CHECK(r.pmf[k] == Approx(oracle::poisson_pmf(k, 1.0)).epsilon(1e-14));
  CHECK(r.exceedance[4] == Approx(0.018988156876153809).epsilon(1e-12));
}

TEST_CASE("loss of two lives on the even integers") {
  const auto r = panjer_exceedance(int_table({{1.0, 2}}), 1.0, up_to(6));
  CHECK(r.pmf[1] == 0.0);
  CHECK(r.pmf[2] == Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(r.pmf[3] == 0.0);
}

TEST_CASE("two rows match the double Poisson enumeration") {
  const std::vector<oracle::IntRow> rows{{1.0, 1}, {1.0, 2}};
  const auto r = panjer_exceedance(int_table(rows), 1.0, up_to(10));
  const auto exact = oracle::convolution_pmf(rows, 1.0, 10);
  for (int s = 0; s <= 10; ++s) CHECK(std::abs(r.pmf[s] - exact[s]) < 1e-12);
}

TEST_CASE("random small instances match brute force") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> nrows(1, 3), loss(0, 5);
  std::uniform_real_distribution<double> rate(0.05, 2.0), horizon(0.2, 1.5);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<oracle::IntRow> rows;
    for (int i = nrows(rng); i > 0; --i) rows.push_back({rate(rng), loss(rng)});
    const double t = horizon(rng);
    const auto r = panjer_exceedance(int_table(rows), t, up_to(25));
    const auto exact = oracle::convolution_exceedance(rows, t, 25);
    for (int s = 0; s <= 25; ++s) {
      INFO("rep=" << rep << " s=" << s);
      CHECK(std::abs(r.exceedance[s] - exact[s]) < 1e-10);
    }
  }
}

TEST_CASE("pmf is a sub-probability with non-decreasing cumulative sum") {
  const auto r = panjer_exceedance(int_table({{0.4, 3}, {2.0, 1}, {0.1, 7}}), 2.0, up_to(200));
  double cumulative = 0.0;
  for (std::size_t s = 0; s < r.pmf.size(); ++s) {
    CHECK(r.pmf[s] >= 0.0);
    cumulative += r.pmf[s];
    CHECK(cumulative <= 1.0 + 1e-14);
    if (s > 0) CHECK(r.exceedance[s] <= r.exceedance[s - 1]);
  }
}

TEST_CASE("zero losses do not change the distribution") {
  const auto with_zero = panjer_exceedance(int_table({{0.7, 0}, {1.0, 1}, {0.5, 3}}), 1.0, up_to(20));
  const auto without = panjer_exceedance(int_table({{1.0, 1}, {0.5, 3}}), 1.0, up_to(20));
  for (int s = 0; s <= 20; ++s) CHECK(with_zero.pmf[s] == Approx(without.pmf[s]).epsilon(1e-13));
}

TEST_CASE("large expected counts do not underflow") {
  // Pr(S = 0) = e^-2000 is far below the double range.
  const auto r = panjer_exceedance(int_table({{2000.0, 1}}), 1.0, up_to(2400));
  CHECK(r.pmf[2000] == Approx(oracle::poisson_pmf(2000, 2000.0)).epsilon(1e-9));
  CHECK(r.exceedance[2000] == Approx(0.5 + 0.5 * 0.0089).margin(0.01));
  double total = 0.0;
  for (double p : r.pmf) total += p;
  CHECK(total == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("currency thresholds map onto the compressed grid") {
  const auto elt = int_table({{0.5, 1500}, {0.2, 2499}});
  PanjerConfig cfg = up_to(10);
  cfg.d = -3;
  const auto r = panjer_exceedance(elt, 1.0, cfg);
  CHECK(r.unit == 1000.0);
  const auto same = panjer_exceedance(int_table({{0.5, 2}, {0.2, 2}}), 1.0, up_to(10));
  CHECK(r.exceedance_at(4000.0) == Approx(same.exceedance[4]).epsilon(1e-14));
  CHECK(r.exceedance_at(3500.0) == Approx(same.exceedance[4]).epsilon(1e-14));
  CHECK(r.exceedance_at(0.0) == 1.0);
  CHECK_THROWS_AS(r.exceedance_at(11000.0), std::out_of_range);
}

TEST_CASE("early stop once the mass is exhausted") {
  const auto r = panjer_exceedance(int_table({{0.1, 1}}), 1.0, up_to(1000));
  CHECK(r.stopped_early);
  CHECK(r.exceedance_at(900.0) == 0.0);
  CHECK(r.exceedance_at(5000.0) == 0.0);
}

TEST_CASE("quantile expansion") {
  std::vector<EltRow> rows{{"g", 0.3, Severity::gamma(4.0, 0.002)}, {"p", 0.1, Severity::point_mass(700.0)}};
  const EventLossTable elt(rows);
  const auto ex = expand_quantiles(elt, 10);
  REQUIRE(ex.size() == 11);
  CHECK(ex.total_rate() == Approx(elt.total_rate()).epsilon(1e-15));
  double rate = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    rate += ex.rows()[i].rate;
    mean += ex.rows()[i].rate * ex.rows()[i].severity.fixed_loss();
    if (i > 0) CHECK(ex.rows()[i].severity.fixed_loss() > ex.rows()[i - 1].severity.fixed_loss());
  }
  CHECK(rate == Approx(0.3).epsilon(1e-15));
  CHECK(mean / rate == Approx(2000.0).epsilon(0.02));  // ten-point discretisation
  CHECK(ex.rows()[0].severity.fixed_loss() == Approx(Severity::gamma(4.0, 0.002).quantile(0.05)).epsilon(1e-12));

  const auto capped = expand_quantiles(EventLossTable({{"c", 1.0, Severity::gamma(1.0, 1.0, 0.5)}}), 10);
  CHECK(capped.rows()[9].severity.fixed_loss() == 0.5);
  CHECK(capped.rows()[0].severity.fixed_loss() == Approx(-std::log(0.95)).epsilon(1e-12));

  // Panjer on a random severity uses the expansion.
  PanjerConfig cfg = up_to(40);
  const auto direct = panjer_exceedance(EventLossTable({{"g", 1.0, Severity::gamma(4.0, 0.5)}}), 1.0, cfg);
  const auto manual = panjer_exceedance(expand_quantiles(EventLossTable({{"g", 1.0, Severity::gamma(4.0, 0.5)}}), 10),
                                        1.0, cfg);
  CHECK(direct.exceedance == manual.exceedance);
}

TEST_CASE("infeasible runs are refused") {
  PanjerConfig cfg = up_to(100000);
  cfg.max_work = 1e6;
  CHECK_THROWS_AS(panjer_exceedance(int_table({{1.0, 50000}}), 1.0, cfg), PanjerInfeasible);
  CHECK_THROWS(panjer_exceedance(int_table({{1.0, 1}}), 1.0, up_to(0)));
}
