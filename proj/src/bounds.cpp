#include "eltbound/bounds.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace eltbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clip(double p) { return std::clamp(p, 0.0, 1.0); }

void check_thresholds(const std::vector<double>& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (std::isnan(s[i])) throw std::invalid_argument("threshold is NaN");
    if (i > 0 && !(s[i] > s[i - 1])) throw std::invalid_argument("thresholds must be strictly ascending");
  }
}

// Reference scale for moment and MGF arithmetic: all losses are divided by it
// so that E(S^k) stays representable for the orders we search.
double reference_scale(double s_max) { return s_max > 0.0 && std::isfinite(s_max) ? s_max : 1.0; }

// Compound moments of S / scale, grown on demand.
class MomentTable {
 public:
  MomentTable(const CompoundModel& model, double scale)
      : model_(model.scaled(1.0 / scale)), severity_{1.0}, compound_{1.0} {}

  // E((S/scale)^k); +inf after overflow.
  double at(int k) {
    if (k >= static_cast<int>(compound_.size())) grow(std::max(k, 2 * static_cast<int>(compound_.size())));
    return compound_[static_cast<std::size_t>(k)];
  }

 private:
  void grow(int k_max) {
    k_max = std::min(k_max, kMaxMomentOrder);
    const int k_from = static_cast<int>(severity_.size());
    if (k_max < k_from) return;
    std::vector<double> added(static_cast<std::size_t>(k_max - k_from + 1), 0.0);
    for (const auto& c : model_.components()) {
      const auto& sev = c.severity;
      if (sev.is_point_mass()) {
        const double x = sev.fixed_loss();
        double p = std::pow(x, k_from);
        for (auto& a : added) {
          a += c.weight * p;
          p *= x;
        }
      } else if (const auto* g = std::get_if<Gamma>(&sev.shape()); g && !sev.cap()) {
        double p = sev.raw_moment(k_from);
        for (std::size_t i = 0; i < added.size(); ++i) {
          added[i] += c.weight * p;
          p *= (g->alpha + k_from + static_cast<double>(i)) / g->beta;
        }
      } else {
        for (std::size_t i = 0; i < added.size(); ++i)
          added[i] += c.weight * sev.raw_moment(k_from + static_cast<int>(i));
      }
    }
    severity_.insert(severity_.end(), added.begin(), added.end());
    compound_ = compound_moments(model_.expected_count(), severity_);
  }

  CompoundModel model_;
  std::vector<double> severity_;
  std::vector<double> compound_;
};

MomentBound search_moment(MomentTable& table, double scaled_s, int k_range, std::optional<int> k_cap) {
  MomentBound out;
  if (scaled_s <= 0.0) return out;
  const double log_s = std::log(scaled_s);
  const int last = k_cap ? std::min(*k_cap, kMaxMomentOrder) : kMaxMomentOrder;
  double best = kInf;
  double previous = kInf;
  for (int k = 1; k <= last; ++k) {
    const double m = table.at(k);
    if (!std::isfinite(m)) break;  // overflow: keep the best finite order
    const double obj = std::log(m) - k * log_s;
    // Beyond the approximate range keep going only while the exact ratio falls;
    // log E(S^k) is convex in k so the first rise marks the minimum.
    if (!k_cap && k > k_range && obj >= previous) break;
    if (obj < best) {
      best = obj;
      out.k = k;
    }
    previous = obj;
    if (k == kMaxMomentOrder) out.hit_ceiling = true;
  }
  out.value = out.k == 0 ? 1.0 : clip(std::exp(best));
  return out;
}

class ChernoffGrid {
 public:
  ChernoffGrid(const CompoundModel& model, double scale, int grid_size) : scale_(scale) {
    if (grid_size < 1) throw std::invalid_argument("Chernoff grid needs at least one point");
    const CompoundModel scaled = model.scaled(1.0 / scale);
    double v_max = scaled.chernoff_limit();
    if (!std::isfinite(v_max)) v_max = 100.0;  // every loss is zero
    const double lt = scaled.expected_count();
    v_.resize(static_cast<std::size_t>(grid_size));
    log_mgf_.resize(v_.size());
    for (int j = 1; j <= grid_size; ++j) {
      const double v = v_max * j / (grid_size + 1.0);
      double value;
      try {
        value = lt * (scaled.severity_mgf(v) - 1.0);
      } catch (const std::domain_error&) {
        value = std::numeric_limits<double>::quiet_NaN();
      }
      v_[static_cast<std::size_t>(j - 1)] = v;
      log_mgf_[static_cast<std::size_t>(j - 1)] = value;
    }
  }

  ChernoffBound evaluate(double s) const {
    ChernoffBound out;
    if (s <= 0.0) return out;
    const double scaled_s = s / scale_;
    double best = 0.0;  // v -> 0 gives exp(0) = 1
    for (std::size_t j = 0; j < v_.size(); ++j) {
      if (!std::isfinite(log_mgf_[j])) {
        ++out.skipped_points;
        continue;
      }
      const double obj = log_mgf_[j] - v_[j] * scaled_s;
      if (obj < best) {
        best = obj;
        out.v = v_[j] / scale_;
      }
    }
    out.value = clip(std::exp(best));
    return out;
  }

 private:
  double scale_;
  std::vector<double> v_;
  std::vector<double> log_mgf_;
};

}  // namespace

std::string_view to_string(BoundMethod method) {
  switch (method) {
    case BoundMethod::Markov: return "markov";
    case BoundMethod::Cantelli: return "cantelli";
    case BoundMethod::Moment: return "moment";
    case BoundMethod::Chernoff: return "chernoff";
  }
  return "unknown";
}

double markov_bound(const CompoundModel& model, double s) {
  if (s <= 0.0) return 1.0;
  return clip(model.mean() / s);
}

double cantelli_bound(const CompoundModel& model, double s) {
  const double mu = model.mean();
  if (s <= mu || s <= 0.0) return 1.0;
  const double var = model.variance();
  const double gap = s - mu;
  return clip(var / (var + gap * gap));
}

int gamma_approx_moment_order(double mean, double variance, double s) {
  if (!(mean > 0.0) || !(variance > 0.0) || !(s > 0.0)) return 1;
  const double shape = mean * mean / variance;
  const double log_rate_s = std::log(mean / variance * s);
  const auto objective = [&](int k) { return std::lgamma(shape + k) - std::lgamma(shape) - k * log_rate_s; };
  double previous = objective(1);
  for (int k = 2; k <= kMaxMomentOrder; ++k) {
    const double current = objective(k);
    if (current > previous) return k;
    previous = current;
  }
  return kMaxMomentOrder;
}

MomentBound moment_bound(const CompoundModel& model, double s, std::optional<int> k_cap) {
  if (k_cap && *k_cap < 1) throw std::invalid_argument("k_cap must be >= 1");
  if (s <= 0.0) return {};
  const double scale = reference_scale(s);
  MomentTable table(model, scale);
  const int k_range = gamma_approx_moment_order(model.mean(), model.variance(), s);
  return search_moment(table, s / scale, k_range, k_cap);
}

ChernoffBound chernoff_bound(const CompoundModel& model, double s, int grid_size) {
  if (s <= 0.0) return {};
  const ChernoffGrid grid(model, reference_scale(s), grid_size);
  return grid.evaluate(s);
}

BoundResult evaluate_bounds(const BoundRequest& request) {
  check_thresholds(request.thresholds);
  const auto& model = request.model;
  const auto& ths = request.thresholds;
  BoundResult out;
  out.values.reserve(ths.size());
  out.diagnostics.resize(ths.size());
  if (ths.empty()) return out;

  switch (request.method) {
    case BoundMethod::Markov: {
      for (double s : ths) out.values.push_back(markov_bound(model, s));
      break;
    }
    case BoundMethod::Cantelli: {
      for (double s : ths) out.values.push_back(cantelli_bound(model, s));
      break;
    }
    case BoundMethod::Moment: {
      if (request.k_cap && *request.k_cap < 1) throw std::invalid_argument("k_cap must be >= 1");
      const double s_max = ths.back();
      const double scale = reference_scale(s_max);
      MomentTable table(model, scale);
      const int k_range = gamma_approx_moment_order(model.mean(), model.variance(), s_max);
      for (std::size_t i = 0; i < ths.size(); ++i) {
        const auto r = search_moment(table, ths[i] / scale, k_range, request.k_cap);
        out.values.push_back(r.value);
        out.diagnostics[i].k = r.k;
        out.diagnostics[i].hit_ceiling = r.hit_ceiling;
      }
      break;
    }
    case BoundMethod::Chernoff: {
      const ChernoffGrid grid(model, reference_scale(ths.back()), request.grid_size);
      for (std::size_t i = 0; i < ths.size(); ++i) {
        const auto r = grid.evaluate(ths[i]);
        out.values.push_back(r.value);
        out.diagnostics[i].v = r.v;
        out.diagnostics[i].skipped_points = r.skipped_points;
      }
      break;
    }
  }
  return out;
}

ExceedanceCurve exceedance_curve(const BoundRequest& request) {
  const auto start = std::chrono::steady_clock::now();
  auto result = evaluate_bounds(request);
  const auto stop = std::chrono::steady_clock::now();
  ExceedanceCurve curve;
  curve.method = std::string(to_string(request.method));
  curve.thresholds = request.thresholds;
  curve.values = std::move(result.values);
  curve.seconds = std::chrono::duration<double>(stop - start).count();
  return curve;
}

}  // namespace eltbound
