#pragma once

#include <optional>
#include <random>
#include <variant>
#include <vector>

namespace eltbound {

using Rng = std::mt19937_64;

// Loss fixed at x.
struct PointMass {
  double x = 0.0;
};

// Shape/rate parameterisation: density beta^alpha x^(alpha-1) e^(-beta x) / Gamma(alpha).
struct Gamma {
  double alpha = 1.0;
  double beta = 1.0;
};

struct GammaComponent {
  double weight = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
};

struct GammaMixture {
  std::vector<GammaComponent> components;
};

// Coefficient of variation used when a fixed loss has to stand in for a
// concentrated Gamma (Chernoff search range, optional conversion).
inline constexpr double kPointMassTheta = 0.1;

/// Single-event loss distribution: a point mass, a Gamma or a Gamma mixture,
/// optionally capped at a maximum loss u. A cap puts an atom of the
/// probability mass above u at u itself.
class Severity {
 public:
  using Shape = std::variant<PointMass, Gamma, GammaMixture>;

  static Severity point_mass(double x, std::optional<double> cap = std::nullopt);
  static Severity gamma(double alpha, double beta, std::optional<double> cap = std::nullopt);
  static Severity mixture(std::vector<GammaComponent> components,
                          std::optional<double> cap = std::nullopt);

  const Shape& shape() const { return shape_; }
  const std::optional<double>& cap() const { return cap_; }

  bool is_point_mass() const { return std::holds_alternative<PointMass>(shape_); }
  bool is_mixture() const { return std::holds_alternative<GammaMixture>(shape_); }

  // Loss of a point mass after the cap is applied. Throws for random severities.
  double fixed_loss() const;

  Severity with_cap(std::optional<double> cap) const;

  // Same distribution with every loss multiplied by factor > 0.
  Severity scaled(double factor) const;

  // E(X^k); k = 0 gives 1.
  double raw_moment(int k) const;

  // E(exp(vX)) for v >= 0. An uncapped Gamma requires v < beta.
  double mgf(double v) const;

  // Pr(X <= x).
  double cdf(double x) const;

  // Smallest x with cdf(x) >= p, for p in (0, 1).
  double quantile(double p) const;

  double sample(Rng& rng) const;

  // Exclusive upper end of the Chernoff search interval contributed by this
  // severity: beta (smallest beta for a mixture, cap ignored), and
  // 1 / (theta^2 x) with theta = kPointMassTheta for a fixed loss x.
  double chernoff_limit() const;

 private:
  Severity(Shape shape, std::optional<double> cap);

  Shape shape_;
  std::optional<double> cap_;
};

/// Gamma with the given mean and coefficient of variation theta:
/// alpha = 1/theta^2, beta = alpha/mean.
Severity gamma_from_mean_cov(double mean, double theta, std::optional<double> cap = std::nullopt);

/// Replaces a fixed loss by a concentrated Gamma with the same mean.
/// Random severities are returned unchanged.
Severity to_concentrated_gamma(const Severity& severity, double theta = kPointMassTheta);

}  // namespace eltbound
