#pragma once

#include "eltbound/curve.hpp"
#include "eltbound/elt.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace eltbound {

// Upper bounds on Pr(S >= s). Every value is clipped to [0, 1]; thresholds
// s <= 0 give 1.

enum class BoundMethod { Markov, Cantelli, Moment, Chernoff };

std::string_view to_string(BoundMethod method);

// Hard ceiling on the moment order searched by the Moment bound.
inline constexpr int kMaxMomentOrder = 200;
inline constexpr int kDefaultChernoffGrid = 1001;

struct MomentBound {
  double value = 1.0;
  int k = 0;                  // minimising order (0 when the bound is vacuous)
  bool hit_ceiling = false;   // search stopped at kMaxMomentOrder
};

struct ChernoffBound {
  double value = 1.0;
  double v = 0.0;             // minimising grid point, currency^-1 (0 when vacuous)
  int skipped_points = 0;     // grid points with a non-finite MGF
};

double markov_bound(const CompoundModel& model, double s);

// 1 for s <= mean.
double cantelli_bound(const CompoundModel& model, double s);

// min over integer k of E(S^k) / s^k. The starting order range comes from a
// two-moment Gamma approximation of S; the search continues upward while the
// exact ratio is still falling. k_cap restricts the orders to 1..k_cap.
MomentBound moment_bound(const CompoundModel& model, double s, std::optional<int> k_cap = std::nullopt);

// min over grid_size equally spaced v in (0, v_max) of exp(lambda t (M_Y(v) - 1) - v s),
// v_max = model.chernoff_limit(); both ends of the interval are excluded.
ChernoffBound chernoff_bound(const CompoundModel& model, double s, int grid_size = kDefaultChernoffGrid);

// Order range suggested by the Gamma approximation of S at threshold s: the
// first k at which the approximate log E(S^k) - k log s rises. Capped at
// kMaxMomentOrder.
int gamma_approx_moment_order(double mean, double variance, double s);

struct BoundRequest {
  CompoundModel model;
  std::vector<double> thresholds;  // strictly ascending
  BoundMethod method = BoundMethod::Moment;
  std::optional<int> k_cap;
  int grid_size = kDefaultChernoffGrid;
};

struct BoundDiagnostic {
  int k = 0;
  double v = 0.0;
  bool hit_ceiling = false;
  int skipped_points = 0;
};

struct BoundResult {
  std::vector<double> values;
  std::vector<BoundDiagnostic> diagnostics;
};

// Evaluates the method at every threshold, sharing the moment table or the
// MGF grid across thresholds. For Moment the order range is sized from the
// largest threshold.
BoundResult evaluate_bounds(const BoundRequest& request);

// evaluate_bounds plus wall-clock timing.
ExceedanceCurve exceedance_curve(const BoundRequest& request);

}  // namespace eltbound
