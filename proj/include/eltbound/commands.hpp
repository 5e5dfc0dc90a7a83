#pragma once

#include "eltbound/curve.hpp"
#include "eltbound/elt.hpp"
#include "eltbound/monte_carlo.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eltbound::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitNumericFailure = 3;

enum class Method { Markov, Cantelli, Moment, Chernoff, MonteCarlo, Panjer };

std::string_view to_string(Method m);

// "markov,moment" or "all".
std::vector<Method> parse_methods(std::string_view list);

struct GridSpec {
  double min = 0.0;
  double max = 1.0;
  int count = 101;

  std::vector<double> points() const;
};

// "min:max:count" or "min:max" (101 points).
GridSpec parse_grid(std::string_view text);

struct CompressOptions {
  std::filesystem::path input;
  std::filesystem::path output;  // empty: stdout
  int d = 0;
  bool drop_zero = false;
};

struct CurveOptions {
  std::filesystem::path input;
  double t = 1.0;
  double theta = 0.0;                // 0: losses stay fixed
  std::optional<double> cap;
  std::optional<int> d;              // compression exponent
  std::optional<GridSpec> grid;      // default: 0 .. mean + 8 sd, 101 points
  std::vector<Method> methods{Method::Markov, Method::Cantelli, Method::Moment, Method::Chernoff};
  std::size_t nsim = 100000;
  std::uint64_t seed = 1;
  std::filesystem::path out;         // empty: stdout
  std::filesystem::path timing_out;  // empty: not written
  std::filesystem::path dump_losses; // empty: not written
  int n_q = 10;
  int chernoff_grid = 1001;
  double panjer_max_work = 2e10;
};

struct MethodTiming {
  std::string method;
  std::optional<double> seconds;  // empty when the method failed
  std::string error;
};

struct CurveRun {
  std::vector<double> thresholds;
  std::vector<ExceedanceCurve> curves;  // successful methods, in request order
  std::vector<MethodTiming> timings;    // every requested method
};

/// Table preparation shared by every method: caps fixed losses, compresses
/// with d, thickens to Gamma losses with theta, then caps the Gamma losses.
EventLossTable prepare_elt(const EventLossTable& elt, const CurveOptions& options);

/// Runs every requested method over the threshold grid.
CurveRun run_curve(const EventLossTable& elt, const CurveOptions& options);

void write_curve_csv(std::ostream& out, const CurveRun& run);
void write_timing_csv(std::ostream& out, const CurveRun& run);

/// Rates log-uniform on [1e-4, 1e-1] per year, losses log-uniform on
/// [1e4, 1e8] rounded to whole currency units.
EventLossTable synthetic_elt(std::size_t rows, std::uint64_t seed);

struct DesignOptions {
  DesignSpec spec;
  std::vector<std::size_t> ns{1000, 10000, 100000, 1000000};
  std::filesystem::path out;  // empty: stdout
};

int cmd_compress(const CompressOptions& options, std::ostream& log);
int cmd_curve(const CurveOptions& options, std::ostream& log);
int cmd_design_n(const DesignOptions& options, std::ostream& log);
int cmd_synth(std::size_t rows, std::uint64_t seed, const std::filesystem::path& output, std::ostream& log);
int cmd_inspect(const std::filesystem::path& input, double t, std::ostream& out);

}  // namespace eltbound::cli
