#include "eltbound/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace cli = eltbound::cli;

int main(int argc, char** argv) {
  CLI::App app{"Tail probabilities of aggregate catastrophe losses from an event loss table"};
  app.require_subcommand(1);

  cli::CompressOptions compress;
  auto* c = app.add_subcommand("compress", "Round losses to d decimal places and merge equal rows");
  c->add_option("input", compress.input, "ELT CSV")->required()->check(CLI::ExistingFile);
  c->add_option("--d", compress.d, "Decimal places kept (negative: round to 10^-d)")->required();
  c->add_option("--out", compress.output, "Output CSV (default stdout)");
  c->add_flag("--drop-zero", compress.drop_zero, "Remove rows whose loss rounds to 0");

  cli::CurveOptions curve;
  std::string methods = "markov,cantelli,moment,chernoff";
  std::string grid;
  std::optional<double> cap;
  std::optional<int> d;
  auto* cv = app.add_subcommand("curve", "Exceedance curve Pr(S_t >= s) over a threshold grid");
  cv->add_option("input", curve.input, "ELT CSV")->required()->check(CLI::ExistingFile);
  cv->add_option("--t", curve.t, "Horizon in years")->capture_default_str();
  cv->add_option("--theta", curve.theta, "Coefficient of variation of Gamma losses (0: fixed)")->capture_default_str();
  cv->add_option("--cap", cap, "Maximum single-event loss");
  cv->add_option("--d", d, "Compression exponent");
  cv->add_option("--grid", grid, "Thresholds min:max:count (default 0 to mean + 8 sd, 101 points)");
  cv->add_option("--methods", methods, "Comma list of markov,cantelli,moment,chernoff,montecarlo,panjer or all")
      ->capture_default_str();
  cv->add_option("--nsim", curve.nsim, "Monte Carlo replicates")->capture_default_str();
  cv->add_option("--seed", curve.seed, "Monte Carlo seed")->capture_default_str();
  cv->add_option("--nq", curve.n_q, "Quantile points per random loss for Panjer")->capture_default_str();
  cv->add_option("--out", curve.out, "Curve CSV (default stdout)");
  cv->add_option("--timing-out", curve.timing_out, "Timing CSV");
  cv->add_option("--dump-losses", curve.dump_losses, "Write simulated losses as replicate,loss CSV");

  cli::DesignOptions design;
  auto* dn = app.add_subcommand("design-n", "Monte Carlo sample size design with Jeffreys intervals");
  dn->add_option("--kappa0", design.spec.kappa0, "Regulatory threshold")->capture_default_str();
  std::optional<double> p0;
  dn->add_option("--p0", p0, "Assumed exceedance probability (default kappa0/2)");
  dn->add_option("--beta0", design.spec.beta0, "Required success probability")->capture_default_str();
  dn->add_option("--alpha", design.spec.alpha_level, "Interval level complement")->capture_default_str();
  dn->add_option("--n", design.ns, "Candidate sample sizes")->delimiter(',');
  dn->add_option("--out", design.out, "Output CSV (default stdout)");

  std::size_t synth_rows = 32060;
  std::uint64_t synth_seed = 1;
  std::filesystem::path synth_out;
  auto* sy = app.add_subcommand("synth", "Generate a synthetic fixed-loss ELT");
  sy->add_option("--rows", synth_rows, "Number of events")->capture_default_str();
  sy->add_option("--seed", synth_seed, "Generator seed")->capture_default_str();
  sy->add_option("--out", synth_out, "Output CSV (default stdout)");

  std::filesystem::path inspect_input;
  double inspect_t = 1.0;
  auto* in = app.add_subcommand("inspect", "Summarise an ELT");
  in->add_option("input", inspect_input, "ELT CSV")->required()->check(CLI::ExistingFile);
  in->add_option("--t", inspect_t, "Horizon in years")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitInputError;
  }

  if (*c) return cli::cmd_compress(compress, std::cerr);
  if (*cv) {
    try {
      curve.methods = cli::parse_methods(methods);
      if (!grid.empty()) curve.grid = cli::parse_grid(grid);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return cli::kExitInputError;
    }
    curve.cap = cap;
    curve.d = d;
    return cli::cmd_curve(curve, std::cerr);
  }
  if (*dn) {
    design.spec.p0 = p0.value_or(design.spec.kappa0 / 2.0);
    return cli::cmd_design_n(design, std::cerr);
  }
  if (*sy) return cli::cmd_synth(synth_rows, synth_seed, synth_out, std::cerr);
  if (*in) return cli::cmd_inspect(inspect_input, inspect_t, std::cout);
  return cli::kExitInputError;
}
