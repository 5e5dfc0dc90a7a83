#include "eltbound/severity.hpp"

#include "eltbound/special.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace eltbound {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void check_gamma_params(double alpha, double beta) {
  if (!positive_finite(alpha) || !positive_finite(beta))
    throw std::invalid_argument("Gamma severity needs finite alpha > 0 and beta > 0 (got alpha=" +
                                std::to_string(alpha) + ", beta=" + std::to_string(beta) + ")");
}

double gamma_moment(double alpha, double beta, int k, const std::optional<double>& cap) {
  if (!cap) {
    double m = 1.0;
    for (int j = 0; j < k; ++j) m *= (alpha + j) / beta;
    return m;
  }
  const double u = *cap;
  const double truncated = std::exp(special::log_lower_gamma(alpha + k, beta * u) -
                                    std::lgamma(alpha) - k * std::log(beta));
  const double tail = boost::math::gamma_q(alpha, beta * u);
  return truncated + tail * std::pow(u, k);
}

double gamma_mgf(double alpha, double beta, double v, const std::optional<double>& cap) {
  if (!cap) {
    if (v >= beta)
      throw std::domain_error("Gamma MGF undefined for v >= beta (v=" + std::to_string(v) +
                              ", beta=" + std::to_string(beta) + ")");
    return std::exp(-alpha * std::log1p(-v / beta));
  }
  const double u = *cap;
  double log_body;
  if (v < beta) {
    // (beta/(beta-v))^alpha * gamma(alpha, (beta-v)u) / Gamma(alpha)
    log_body = alpha * std::log(beta) - alpha * std::log(beta - v) +
               special::log_lower_gamma(alpha, (beta - v) * u) - std::lgamma(alpha);
  } else {
    // The integrand grows: beta^alpha / Gamma(alpha) * int_0^u x^(alpha-1) e^((v-beta)x) dx
    log_body = alpha * std::log(beta) - std::lgamma(alpha) +
               special::log_growing_gamma_integral(alpha, v - beta, u);
  }
  const double log_atom = std::log(boost::math::gamma_q(alpha, beta * u)) + v * u;
  return std::exp(special::log_sum_exp(log_body, log_atom));
}

}  // namespace

Severity::Severity(Shape shape, std::optional<double> cap) : shape_(std::move(shape)), cap_(cap) {
  if (cap_ && !positive_finite(*cap_))
    throw std::invalid_argument("severity cap must be finite and > 0");
}

Severity Severity::point_mass(double x, std::optional<double> cap) {
  if (!std::isfinite(x) || x < 0.0)
    throw std::invalid_argument("point-mass loss must be finite and >= 0 (got " + std::to_string(x) +
                                ")");
  return Severity(PointMass{x}, cap);
}

Severity Severity::gamma(double alpha, double beta, std::optional<double> cap) {
  check_gamma_params(alpha, beta);
  return Severity(Gamma{alpha, beta}, cap);
}

Severity Severity::mixture(std::vector<GammaComponent> components, std::optional<double> cap) {
  if (components.empty()) throw std::invalid_argument("Gamma mixture needs at least one component");
  double total = 0.0;
  for (const auto& c : components) {
    if (!positive_finite(c.weight)) throw std::invalid_argument("mixture weights must be > 0");
    check_gamma_params(c.alpha, c.beta);
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("mixture weights must sum to 1 (got " + std::to_string(total) + ")");
  return Severity(GammaMixture{std::move(components)}, cap);
}

double Severity::fixed_loss() const {
  const auto* pm = std::get_if<PointMass>(&shape_);
  if (!pm) throw std::logic_error("fixed_loss() called on a random severity");
  return cap_ ? std::min(pm->x, *cap_) : pm->x;
}

Severity Severity::with_cap(std::optional<double> cap) const { return Severity(shape_, cap); }

Severity Severity::scaled(double factor) const {
  if (!positive_finite(factor)) throw std::invalid_argument("scale factor must be finite and > 0");
  std::optional<double> cap;
  if (cap_) cap = *cap_ * factor;
  return std::visit(
      [&](const auto& s) -> Severity {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          return Severity(PointMass{s.x * factor}, cap);
        } else if constexpr (std::is_same_v<T, Gamma>) {
          return Severity(Gamma{s.alpha, s.beta / factor}, cap);
        } else {
          GammaMixture m = s;
          for (auto& c : m.components) c.beta /= factor;
          return Severity(std::move(m), cap);
        }
      },
      shape_);
}

double Severity::raw_moment(int k) const {
  if (k < 0) throw std::invalid_argument("moment order must be >= 0");
  if (k == 0) return 1.0;
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          return std::pow(fixed_loss(), k);
        } else if constexpr (std::is_same_v<T, Gamma>) {
          return gamma_moment(s.alpha, s.beta, k, cap_);
        } else {
          double m = 0.0;
          for (const auto& c : s.components) m += c.weight * gamma_moment(c.alpha, c.beta, k, cap_);
          return m;
        }
      },
      shape_);
}

double Severity::mgf(double v) const {
  if (!(v >= 0.0)) throw std::invalid_argument("MGF argument must be >= 0");
  if (v == 0.0) return 1.0;
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          return std::exp(v * fixed_loss());
        } else if constexpr (std::is_same_v<T, Gamma>) {
          return gamma_mgf(s.alpha, s.beta, v, cap_);
        } else {
          double m = 0.0;
          for (const auto& c : s.components) m += c.weight * gamma_mgf(c.alpha, c.beta, v, cap_);
          return m;
        }
      },
      shape_);
}

double Severity::cdf(double x) const {
  if (x < 0.0) return 0.0;
  if (cap_ && x >= *cap_) return 1.0;
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          return x >= s.x ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, Gamma>) {
          return boost::math::gamma_p(s.alpha, s.beta * x);
        } else {
          double p = 0.0;
          for (const auto& c : s.components) p += c.weight * boost::math::gamma_p(c.alpha, c.beta * x);
          return p;
        }
      },
      shape_);
}

double Severity::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1)");
  const double q = std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          return s.x;
        } else if constexpr (std::is_same_v<T, Gamma>) {
          return boost::math::gamma_p_inv(s.alpha, p) / s.beta;
        } else {
          // The mixture quantile lies between the smallest and largest component quantile.
          double lo = std::numeric_limits<double>::infinity();
          double hi = 0.0;
          for (const auto& c : s.components) {
            const double qc = boost::math::gamma_p_inv(c.alpha, p) / c.beta;
            lo = std::min(lo, qc);
            hi = std::max(hi, qc);
          }
          const auto f = [&](double x) {
            double acc = 0.0;
            for (const auto& c : s.components) acc += c.weight * boost::math::gamma_p(c.alpha, c.beta * x);
            return acc - p;
          };
          const double flo = f(lo);
          const double fhi = f(hi);
          if (flo >= 0.0) return lo;
          if (fhi <= 0.0) return hi;
          std::uintmax_t iters = 200;
          const auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-14 * std::max(a, b); };
          const auto root = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
          return root.second;
        }
      },
      shape_);
  return cap_ ? std::min(q, *cap_) : q;
}

double Severity::sample(Rng& rng) const {
  const double x = std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          return s.x;
        } else if constexpr (std::is_same_v<T, Gamma>) {
          return std::gamma_distribution<double>(s.alpha, 1.0 / s.beta)(rng);
        } else {
          double pick = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
          const GammaComponent* chosen = &s.components.back();
          for (const auto& c : s.components) {
            if (pick < c.weight) {
              chosen = &c;
              break;
            }
            pick -= c.weight;
          }
          return std::gamma_distribution<double>(chosen->alpha, 1.0 / chosen->beta)(rng);
        }
      },
      shape_);
  return cap_ ? std::min(x, *cap_) : x;
}

double Severity::chernoff_limit() const {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          const double x = fixed_loss();
          if (x <= 0.0) return std::numeric_limits<double>::infinity();
          return 1.0 / (kPointMassTheta * kPointMassTheta * x);
        } else if constexpr (std::is_same_v<T, Gamma>) {
          return s.beta;
        } else {
          double b = std::numeric_limits<double>::infinity();
          for (const auto& c : s.components) b = std::min(b, c.beta);
          return b;
        }
      },
      shape_);
}

Severity gamma_from_mean_cov(double mean, double theta, std::optional<double> cap) {
  if (!positive_finite(mean)) throw std::invalid_argument("mean must be finite and > 0");
  if (!positive_finite(theta)) throw std::invalid_argument("coefficient of variation must be > 0");
  const double alpha = 1.0 / (theta * theta);
  return Severity::gamma(alpha, alpha / mean, cap);
}

Severity to_concentrated_gamma(const Severity& severity, double theta) {
  if (!severity.is_point_mass()) return severity;
  const auto& pm = std::get<PointMass>(severity.shape());
  if (pm.x <= 0.0) return severity;
  return gamma_from_mean_cov(pm.x, theta, severity.cap());
}

}  // namespace eltbound
