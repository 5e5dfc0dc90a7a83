#include "eltbound/elt.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace eltbound {

namespace {

constexpr double kMaxExactInteger = 9007199254740992.0;  // 2^53

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

double parse_number(std::string_view field, std::size_t line, std::string_view name) {
  double value = 0.0;
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
    throw ParseError(line, "malformed " + std::string(name) + " '" + std::string(field) + "'");
  if (!std::isfinite(value)) throw ParseError(line, "non-finite " + std::string(name));
  return value;
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double pow10_exact(int e) {
  double p = 1.0;
  for (int i = 0; i < std::abs(e); ++i) p *= 10.0;
  return e >= 0 ? p : 1.0 / p;
}

// round(x * 10^d) with half-away-from-zero applied to the shortest decimal
// representation of x >= 0, so 1.005 at d = 2 gives 101.
double decimal_round_key(double x, int d) {
  char buf[400];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed);
  std::string text(buf, res.ptr);
  const auto dot = text.find('.');
  std::string digits = text;
  std::ptrdiff_t point = static_cast<std::ptrdiff_t>(text.size());
  if (dot != std::string::npos) {
    digits = text.substr(0, dot) + text.substr(dot + 1);
    point = static_cast<std::ptrdiff_t>(dot);
  }
  const std::ptrdiff_t cut = point + d;  // digits[0, cut) form the integer key
  if (cut < 0) return 0.0;
  std::string kept;
  if (cut >= static_cast<std::ptrdiff_t>(digits.size())) {
    kept = digits + std::string(static_cast<std::size_t>(cut) - digits.size(), '0');
  } else {
    kept = digits.substr(0, static_cast<std::size_t>(cut));
  }
  const bool round_up = cut < static_cast<std::ptrdiff_t>(digits.size()) &&
                        digits[static_cast<std::size_t>(cut)] >= '5';
  double key = 0.0;
  for (char c : kept) key = key * 10.0 + (c - '0');
  if (round_up) key += 1.0;
  if (key > kMaxExactInteger)
    throw std::invalid_argument("compressed loss " + shortest(key) + " exceeds exact integer range");
  return key;
}

// Decimal exponent e with unit == 10^e, if there is one.
std::optional<int> power_of_ten_exponent(double unit) {
  const double e = std::round(std::log10(unit));
  if (std::abs(e) > 22) return std::nullopt;
  const int ei = static_cast<int>(e);
  if (pow10_exact(ei) == unit) return ei;
  return std::nullopt;
}

// Exact decimal text for integer key * 10^e.
std::string scaled_integer(double key, int e) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, key, std::chars_format::fixed, 0);
  std::string digits(buf, res.ptr);
  if (key == 0.0) return "0";
  if (e >= 0) return digits + std::string(static_cast<std::size_t>(e), '0');
  const std::size_t frac = static_cast<std::size_t>(-e);
  if (digits.size() <= frac) digits.insert(0, frac - digits.size() + 1, '0');
  digits.insert(digits.size() - frac, ".");
  while (digits.back() == '0') digits.pop_back();
  if (digits.back() == '.') digits.pop_back();
  return digits;
}

}  // namespace

EventLossTable::EventLossTable(std::vector<EltRow> rows, double loss_unit)
    : rows_(std::move(rows)), loss_unit_(loss_unit), total_rate_(0.0) {
  if (rows_.empty()) throw std::invalid_argument("event loss table has no rows");
  if (!std::isfinite(loss_unit_) || loss_unit_ <= 0.0)
    throw std::invalid_argument("loss unit must be finite and > 0");
  for (const auto& r : rows_) {
    if (!std::isfinite(r.rate) || r.rate <= 0.0)
      throw std::invalid_argument("event '" + r.event_id + "' has rate " + shortest(r.rate) +
                                  "; rates must be finite and > 0");
    total_rate_ += r.rate;
  }
  if (!std::isfinite(total_rate_)) throw std::invalid_argument("total rate is not finite");
}

bool EventLossTable::all_point_mass() const {
  return std::all_of(rows_.begin(), rows_.end(), [](const EltRow& r) { return r.severity.is_point_mass(); });
}

CompoundModel::CompoundModel(double lambda, double horizon, std::vector<MixtureComponent> components)
    : lambda_(lambda), horizon_(horizon), components_(std::move(components)) {
  if (!std::isfinite(lambda_) || lambda_ <= 0.0) throw std::invalid_argument("lambda must be > 0");
  if (!std::isfinite(horizon_) || horizon_ <= 0.0) throw std::invalid_argument("horizon must be > 0");
  if (components_.empty()) throw std::invalid_argument("compound model needs a severity");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!std::isfinite(c.weight) || c.weight < 0.0)
      throw std::invalid_argument("mixture weights must be finite and >= 0");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-10)
    throw std::invalid_argument("mixture weights sum to " + shortest(total) + ", not 1");
  severity_m1_ = severity_moment(1);
  severity_m2_ = severity_moment(2);
}

double CompoundModel::severity_moment(int k) const {
  double m = 0.0;
  for (const auto& c : components_) m += c.weight * c.severity.raw_moment(k);
  return m;
}

double CompoundModel::severity_mgf(double v) const {
  double m = 0.0;
  for (const auto& c : components_) m += c.weight * c.severity.mgf(v);
  return m;
}

double CompoundModel::mean() const { return expected_count() * severity_m1_; }

double CompoundModel::variance() const { return expected_count() * severity_m2_; }

double CompoundModel::second_raw_moment() const {
  const double mu = mean();
  return variance() + mu * mu;
}

double CompoundModel::chernoff_limit() const {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& c : components_) v = std::min(v, c.severity.chernoff_limit());
  return v;
}

CompoundModel CompoundModel::scaled(double factor) const {
  std::vector<MixtureComponent> comps;
  comps.reserve(components_.size());
  for (const auto& c : components_) comps.push_back({c.weight, c.severity.scaled(factor)});
  return CompoundModel(lambda_, horizon_, std::move(comps));
}

CompoundModel CompoundModel::with_horizon(double horizon) const {
  CompoundModel out = *this;
  if (!std::isfinite(horizon) || horizon <= 0.0) throw std::invalid_argument("horizon must be > 0");
  out.horizon_ = horizon;
  return out;
}

EventLossTable parse_elt(std::istream& in) {
  enum class Layout { PointMass, Gamma };
  std::string line;
  std::size_t lineno = 0;
  std::optional<Layout> layout;
  std::size_t columns = 0;
  std::vector<EltRow> rows;

  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (lineno == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (trim(view).empty()) continue;
    const auto fields = split_fields(view);

    if (!layout) {
      if (fields.size() == 3 && iequals(fields[0], "EventID") && iequals(fields[1], "Rate") &&
          iequals(fields[2], "Loss")) {
        layout = Layout::PointMass;
      } else if ((fields.size() == 4 || fields.size() == 5) && iequals(fields[0], "EventID") &&
                 iequals(fields[1], "Rate") && iequals(fields[2], "Alpha") && iequals(fields[3], "Beta") &&
                 (fields.size() == 4 || iequals(fields[4], "Cap"))) {
        layout = Layout::Gamma;
      } else {
        throw ParseError(lineno, "expected header 'EventID,Rate,Loss' or 'EventID,Rate,Alpha,Beta[,Cap]'");
      }
      columns = fields.size();
      continue;
    }

    if (fields.size() != columns)
      throw ParseError(lineno, "expected " + std::to_string(columns) + " fields, found " +
                                   std::to_string(fields.size()));
    EltRow row;
    row.event_id = std::string(fields[0]);
    row.rate = parse_number(fields[1], lineno, "rate");
    if (row.rate <= 0.0) throw ValidationError(lineno, "rate must be > 0 (got " + std::string(fields[1]) + ")");
    try {
      if (*layout == Layout::PointMass) {
        row.severity = Severity::point_mass(parse_number(fields[2], lineno, "loss"));
      } else {
        const double alpha = parse_number(fields[2], lineno, "alpha");
        const double beta = parse_number(fields[3], lineno, "beta");
        std::optional<double> cap;
        if (columns == 5 && !fields[4].empty()) cap = parse_number(fields[4], lineno, "cap");
        row.severity = Severity::gamma(alpha, beta, cap);
      }
    } catch (const std::invalid_argument& e) {
      throw ValidationError(lineno, e.what());
    }
    rows.push_back(std::move(row));
  }
  if (!layout) throw ParseError(lineno, "empty input, header row is required");
  if (rows.empty()) throw ParseError(lineno, "no data rows");
  return EventLossTable(std::move(rows));
}

EventLossTable read_elt(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_elt(in);
}

void write_elt(std::ostream& out, const EventLossTable& elt) {
  const double unit = elt.loss_unit();
  if (elt.all_point_mass()) {
    const auto exponent = power_of_ten_exponent(unit);
    out << "EventID,Rate,Loss\n";
    for (const auto& r : elt.rows()) {
      const double x = r.severity.fixed_loss();
      std::string loss;
      if (exponent && x == std::floor(x) && x <= kMaxExactInteger)
        loss = scaled_integer(x, *exponent);
      else
        loss = shortest(x * unit);
      out << r.event_id << ',' << shortest(r.rate) << ',' << loss << '\n';
    }
    return;
  }
  const bool any_cap = std::any_of(elt.rows().begin(), elt.rows().end(),
                                   [](const EltRow& r) { return r.severity.cap().has_value(); });
  out << (any_cap ? "EventID,Rate,Alpha,Beta,Cap\n" : "EventID,Rate,Alpha,Beta\n");
  for (const auto& r : elt.rows()) {
    const auto* g = std::get_if<Gamma>(&r.severity.shape());
    if (!g)
      throw UnsupportedOperation("CSV output mixes fixed losses with Gamma rows or holds a Gamma mixture");
    out << r.event_id << ',' << shortest(r.rate) << ',' << shortest(g->alpha) << ','
        << shortest(g->beta / unit);
    if (any_cap) {
      out << ',';
      if (r.severity.cap()) out << shortest(*r.severity.cap() * unit);
    }
    out << '\n';
  }
}

void write_elt(const std::filesystem::path& path, const EventLossTable& elt) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_elt(out, elt);
}

EventLossTable compress_elt(const EventLossTable& elt, int d, bool drop_zero_rows) {
  if (std::abs(d) > 22) throw std::invalid_argument("compression exponent must lie in [-22, 22]");
  if (!elt.all_point_mass())
    throw UnsupportedOperation("compression is defined for fixed losses only; random severities "
                               "must be expanded first");
  std::map<double, double> merged;
  for (const auto& r : elt.rows()) {
    const double currency = r.severity.fixed_loss() * elt.loss_unit();
    merged[decimal_round_key(currency, d)] += r.rate;
  }
  std::vector<EltRow> rows;
  rows.reserve(merged.size());
  std::size_t id = 0;
  for (const auto& [key, rate] : merged) {
    if (drop_zero_rows && key == 0.0) continue;
    rows.push_back({std::to_string(++id), rate, Severity::point_mass(key)});
  }
  if (rows.empty()) throw std::invalid_argument("every loss rounds to zero at d=" + std::to_string(d));
  return EventLossTable(std::move(rows), pow10_exact(-d));
}

EventLossTable apply_cap(const EventLossTable& elt, double u) {
  if (!std::isfinite(u) || u <= 0.0) throw std::invalid_argument("cap must be finite and > 0");
  const double stored_cap = u / elt.loss_unit();
  std::vector<EltRow> rows = elt.rows();
  for (auto& r : rows) {
    if (r.severity.is_point_mass())
      r.severity = Severity::point_mass(std::min(r.severity.fixed_loss(), stored_cap));
    else
      r.severity = r.severity.with_cap(stored_cap);
  }
  return EventLossTable(std::move(rows), elt.loss_unit());
}

EventLossTable thicken(const EventLossTable& elt, double theta) {
  std::vector<EltRow> rows = elt.rows();
  for (auto& r : rows) {
    if (!r.severity.is_point_mass()) continue;
    const double x = r.severity.fixed_loss();
    if (x > 0.0) r.severity = gamma_from_mean_cov(x, theta);
  }
  return EventLossTable(std::move(rows), elt.loss_unit());
}

CompoundModel to_compound_model(const EventLossTable& elt, double horizon) {
  const double lambda = elt.total_rate();
  const double unit = elt.loss_unit();
  std::vector<MixtureComponent> comps;
  comps.reserve(elt.size());
  for (const auto& r : elt.rows()) {
    const double w = r.rate / lambda;
    const Severity sev = unit == 1.0 ? r.severity : r.severity.scaled(unit);
    if (const auto* mix = std::get_if<GammaMixture>(&sev.shape())) {
      for (const auto& c : mix->components)
        comps.push_back({w * c.weight, Severity::gamma(c.alpha, c.beta, sev.cap())});
    } else {
      comps.push_back({w, sev});
    }
  }
  return CompoundModel(lambda, horizon, std::move(comps));
}

std::vector<double> compound_moments(double expected_count, std::span<const double> severity_moments) {
  if (severity_moments.empty()) return {1.0};
  const std::size_t k_max = severity_moments.size() - 1;
  for (std::size_t k = 1; k <= k_max; ++k) {
    if (std::isnan(severity_moments[k]) || severity_moments[k] < 0.0)
      throw std::invalid_argument("severity moment of order " + std::to_string(k) +
                                  " is negative or NaN");
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> out(k_max + 1, inf);
  out[0] = 1.0;
  std::vector<double> binom{1.0};  // row k-1 of Pascal's triangle
  for (std::size_t k = 1; k <= k_max; ++k) {
    if (k > 1) {
      std::vector<double> next(k, 1.0);
      for (std::size_t j = 1; j + 1 < k; ++j) next[j] = binom[j - 1] + binom[j];
      binom = std::move(next);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += binom[j] * out[j] * severity_moments[k - j];
    const double value = expected_count * sum;
    if (!std::isfinite(value)) break;  // remaining entries stay +inf
    out[k] = value;
  }
  return out;
}

std::vector<double> aggregate_moments(const CompoundModel& model, int k_max) {
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  std::vector<double> ym(static_cast<std::size_t>(k_max) + 1);
  for (int k = 0; k <= k_max; ++k) ym[static_cast<std::size_t>(k)] = model.severity_moment(k);
  return compound_moments(model.expected_count(), ym);
}

}  // namespace eltbound
