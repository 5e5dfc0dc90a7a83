#pragma once

#include "eltbound/curve.hpp"
#include "eltbound/elt.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace eltbound {

struct McConfig {
  std::size_t n = 100000;           // replicates
  std::uint64_t seed = 1;
  double alpha_level = 0.05;        // interval has coverage 1 - alpha_level
  std::optional<double> cap;        // each sampled loss is capped at this value
  std::size_t block_size = 8192;    // replicates per rng substream
  unsigned threads = 0;             // 0: hardware concurrency
};

/// n replicates of the aggregate loss S_t. Replicates are produced in blocks,
/// block b drawing from an rng seeded by (seed, b); the output does not depend
/// on the thread count.
std::vector<double> simulate_annual_losses(const CompoundModel& model, const McConfig& config);

struct EstimateWithCI {
  double p_hat = 0.0;
  double lower = 0.0;
  double upper = 1.0;
  std::size_t x = 0;
  std::size_t n = 0;
};

/// Equal-tailed Jeffreys interval: alpha/2 and 1 - alpha/2 quantiles of
/// Beta(x + 1/2, n - x + 1/2), with lower = 0 at x = 0 and upper = 1 at x = n.
EstimateWithCI jeffreys_interval(std::size_t x, std::size_t n, double alpha_level);

/// Upper Jeffreys limit u_{1-alpha}(x; n).
double jeffreys_upper(std::size_t x, std::size_t n, double alpha_level);

EstimateWithCI estimate_exceedance(std::span<const double> losses, double s0, double alpha_level);

/// Exceedance estimates with Jeffreys intervals at every threshold. The simulated
/// losses, in replicate order, are copied to losses_out when it is given.
ExceedanceCurve monte_carlo_curve(const CompoundModel& model, const std::vector<double>& thresholds,
                                  const McConfig& config, std::vector<double>* losses_out = nullptr);

/// CSV "replicate,loss" with replicates numbered from 1.
void write_losses(std::ostream& out, std::span<const double> losses);

struct DesignSpec {
  double kappa0 = 0.005;
  double p0 = 0.0025;
  double beta0 = 0.99;
  double alpha_level = 0.05;
};

struct DesignPoint {
  std::size_t n = 0;
  double success_probability = 0.0;      // Pr{u(X; n) <= kappa0}, X ~ Binom(n, p0)
  double log_failure_probability = 0.0;  // log of 1 - success (-inf below the double range)
  std::optional<std::size_t> max_x;      // largest x with u(x; n) <= kappa0
};

std::vector<DesignPoint> design_sample_size(const DesignSpec& spec, std::span<const std::size_t> candidate_ns);

/// Smallest candidate whose success probability reaches beta0 (compared through
/// the failure probability, so beta0 = 1 is never met).
std::optional<std::size_t> recommend_sample_size(std::span<const DesignPoint> points, double beta0);

}  // namespace eltbound
