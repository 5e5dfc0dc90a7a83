#pragma once

#include "eltbound/severity.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace eltbound {

// Malformed ELT input; line is 1-based and counts the header.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that violates a table invariant (e.g. a rate <= 0).
class ValidationError : public ParseError {
  using ParseError::ParseError;
};

// Operation not defined for the given input, e.g. compressing random losses.
class UnsupportedOperation : public std::logic_error {
  using std::logic_error::logic_error;
};

struct EltRow {
  std::string event_id;
  double rate = 0.0;  // arrivals per year
  Severity severity = Severity::point_mass(0.0);
};

/// Event loss table. Stored losses are multiplied by loss_unit to get
/// currency; compression changes loss_unit instead of rewriting currency.
class EventLossTable {
 public:
  explicit EventLossTable(std::vector<EltRow> rows, double loss_unit = 1.0);

  const std::vector<EltRow>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  double loss_unit() const { return loss_unit_; }
  double total_rate() const { return total_rate_; }
  bool all_point_mass() const;

 private:
  std::vector<EltRow> rows_;
  double loss_unit_;
  double total_rate_;
};

struct MixtureComponent {
  double weight;
  Severity severity;
};

/// Compound Poisson loss over a horizon: N ~ Poisson(lambda * horizon)
/// events, each with a loss drawn from the severity mixture. Losses are in
/// currency units.
class CompoundModel {
 public:
  CompoundModel(double lambda, double horizon, std::vector<MixtureComponent> components);

  double lambda() const { return lambda_; }
  double horizon() const { return horizon_; }
  double expected_count() const { return lambda_ * horizon_; }
  const std::vector<MixtureComponent>& components() const { return components_; }

  // E(Y^k) of the mixture severity Y.
  double severity_moment(int k) const;
  // M_Y(v).
  double severity_mgf(double v) const;

  double mean() const;                // lambda t E(Y)
  double variance() const;            // lambda t E(Y^2)
  double second_raw_moment() const;   // E(S^2)

  // Smallest chernoff_limit() over the components (currency^-1).
  double chernoff_limit() const;

  // Same model with all losses multiplied by factor.
  CompoundModel scaled(double factor) const;

  CompoundModel with_horizon(double horizon) const;

 private:
  double lambda_;
  double horizon_;
  std::vector<MixtureComponent> components_;
  double severity_m1_ = 0.0;
  double severity_m2_ = 0.0;
};

EventLossTable parse_elt(std::istream& in);
EventLossTable read_elt(const std::filesystem::path& path);

/// Writes the CSV form read by parse_elt, losses in currency units. Point-mass
/// tables whose loss_unit is a power of ten are written without rounding noise.
void write_elt(std::ostream& out, const EventLossTable& elt);
void write_elt(const std::filesystem::path& path, const EventLossTable& elt);

/// Round-and-merge: each fixed loss x (in currency) is rounded half away from
/// zero to d decimal places of its decimal representation and stored as the
/// integer round(x * 10^d); rows sharing an integer are merged by adding their
/// rates. Output rows are in ascending loss order with event ids "1".."m" and
/// loss_unit = 10^-d. Keys that round to 0 are kept unless drop_zero_rows.
EventLossTable compress_elt(const EventLossTable& elt, int d, bool drop_zero_rows = false);

/// Caps single-event losses at u (currency). Fixed losses above u become u;
/// random severities carry the cap.
EventLossTable apply_cap(const EventLossTable& elt, double u);

/// Replaces each fixed loss x > 0 by a Gamma with mean x and coefficient of
/// variation theta. Zero losses stay fixed.
EventLossTable thicken(const EventLossTable& elt, double theta);

/// One compound model with mixture weights lambda_i / lambda. Gamma mixtures are
/// flattened into one component per mixture term.
CompoundModel to_compound_model(const EventLossTable& elt, double horizon);

/// [E(S^0), ..., E(S^k_max)] from
/// E(S^k) = lambda t sum_{j<k} C(k-1, j) E(S^j) E(Y^(k-j)). Overflow yields +inf.
std::vector<double> aggregate_moments(const CompoundModel& model, int k_max);

/// Same recursion from explicit severity moments (severity_moments[k] = E(Y^k)).
std::vector<double> compound_moments(double expected_count, std::span<const double> severity_moments);

}  // namespace eltbound
