#pragma once

#include "eltbound/elt.hpp"

#include <stdexcept>
#include <vector>

namespace eltbound {

struct PanjerConfig {
  int n_q = 10;            // quantile points per random severity
  long long s_max = 1000;  // last evaluated aggregate loss, in compressed units
  int d = 0;               // decimal places of the currency loss kept after expansion
  double max_work = 2e10;  // refuse runs needing more multiply-adds than this
};

// The requested run would exceed PanjerConfig::max_work.
class PanjerInfeasible : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PanjerResult {
  std::vector<double> pmf;         // Pr(S = s), s = 0..s_max
  std::vector<double> exceedance;  // Pr(S >= s), s = 0..s_max
  double unit = 1.0;               // currency per integer step of s
  bool stopped_early = false;      // cumulative mass reached 1 - 1e-15 before s_max; the tail is 0 from there

  // Pr(S >= s) for a currency threshold s (0 beyond s_max).
  double exceedance_at(double s) const;
};

/// Replaces every random-severity row by n_q fixed-loss rows of rate rate/n_q
/// at the (j/n_q - 1/(2 n_q)) quantiles, j = 1..n_q. Caps clamp the quantiles.
EventLossTable expand_quantiles(const EventLossTable& elt, int n_q);

/// Pr(S = s) for integer losses: Pr(S=0) = exp(-rho (1 - q_0)) and
/// Pr(S=s) = (rho/s) sum_{j=1..s} j q_j Pr(S=s-j), rho = lambda t. rate_by_loss[j]
/// is the total arrival rate of events with loss j; extra_positive_rate is the
/// rate of events whose loss lies beyond the end of rate_by_loss. Once the
/// cumulative mass reaches 1 - 1e-15 the remaining entries are left at 0.
std::vector<double> panjer_pmf(const std::vector<double>& rate_by_loss, double horizon, long long s_max,
                               bool* stopped_early = nullptr, double extra_positive_rate = 0.0);

/// Expands random severities, compresses with config.d, then runs the
/// recursion over s = 0..config.s_max.
PanjerResult panjer_exceedance(const EventLossTable& elt, double horizon, const PanjerConfig& config);

}  // namespace eltbound
