#include "eltbound/special.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace eltbound::special {

double log_lower_gamma(double a, double z) {
  if (!(a > 0.0)) throw std::invalid_argument("log_lower_gamma: shape must be positive");
  if (z <= 0.0) return -std::numeric_limits<double>::infinity();
  if (std::isinf(z)) return std::lgamma(a);

  if (z < a + 1.0) {
    // gamma(a,z) = z^a e^-z sum_n z^n / (a (a+1) ... (a+n))
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 100000; ++n) {
      term *= z / (a + n);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return a * std::log(z) - z + std::log(sum);
  }
  const double q = boost::math::gamma_q(a, z);
  return std::lgamma(a) + std::log1p(-q);
}

double log_growing_gamma_integral(double a, double c, double u) {
  if (!(a > 0.0) || !(u > 0.0) || c < 0.0)
    throw std::invalid_argument("log_growing_gamma_integral: bad arguments");
  const double m = c * u;
  if (m == 0.0) return a * std::log(u) - std::log(a);

  // int_0^u x^(a-1) e^(cx) dx = u^a e^m E[1 / (a + N)], N ~ Poisson(m).
  // The Poisson weights are summed outward from the mode so nothing overflows.
  const auto log_weight = [m](double n) { return n * std::log(m) - m - std::lgamma(n + 1.0); };
  const double mode = std::floor(m);
  double expectation = 0.0;
  for (double n = mode; n >= 0.0; n -= 1.0) {
    const double w = std::exp(log_weight(n));
    expectation += w / (a + n);
    if (n < mode - 10.0 && w < 1e-18 * expectation) break;
  }
  for (double n = mode + 1.0;; n += 1.0) {
    const double w = std::exp(log_weight(n));
    expectation += w / (a + n);
    if (n > mode + 10.0 && w < 1e-18 * expectation) break;
  }
  return a * std::log(u) + m + std::log(expectation);
}

double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace eltbound::special
