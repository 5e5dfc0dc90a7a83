#pragma once

#include <string>
#include <vector>

namespace eltbound {

/// Pr(S >= s) (or an upper bound on it) at ascending thresholds s.
/// lower/upper are filled only by methods that report an interval.
struct ExceedanceCurve {
  std::string method;
  std::vector<double> thresholds;
  std::vector<double> values;
  std::vector<double> lower;
  std::vector<double> upper;
  double seconds = 0.0;
};

}  // namespace eltbound
