#include "eltbound/panjer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <string>

namespace eltbound {

namespace {

constexpr double kRescaleAbove = 1e250;
constexpr double kCumulativeStop = 1.0 - 1e-15;
constexpr long long kMaxPoints = 200'000'000;

}  // namespace

double PanjerResult::exceedance_at(double s) const {
  if (s <= 0.0) return 1.0;
  const double idx = std::ceil(s / unit - 1e-9);
  if (idx < static_cast<double>(exceedance.size())) return exceedance[static_cast<std::size_t>(idx)];
  if (stopped_early) return 0.0;
  throw std::out_of_range("threshold lies beyond the evaluated Panjer range");
}

EventLossTable expand_quantiles(const EventLossTable& elt, int n_q) {
  if (n_q < 1) throw std::invalid_argument("n_q must be >= 1");
  std::vector<EltRow> rows;
  rows.reserve(elt.size());
  for (const auto& r : elt.rows()) {
    if (r.severity.is_point_mass()) {
      rows.push_back({r.event_id, r.rate, Severity::point_mass(r.severity.fixed_loss())});
      continue;
    }
    const double rate = r.rate / n_q;
    for (int j = 1; j <= n_q; ++j) {
      const double p = (j - 0.5) / n_q;
      rows.push_back({r.event_id + "#" + std::to_string(j), rate, Severity::point_mass(r.severity.quantile(p))});
    }
  }
  return EventLossTable(std::move(rows), elt.loss_unit());
}

std::vector<double> panjer_pmf(const std::vector<double>& rate_by_loss, double horizon, long long s_max,
                               bool* stopped_early, double extra_positive_rate) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  if (s_max < 0) throw std::invalid_argument("s_max must be >= 0");
  if (s_max > kMaxPoints) throw PanjerInfeasible("s_max too large for Panjer recursion");
  if (stopped_early) *stopped_early = false;

  // a[j] = j * lambda_j * t, so that Pr(S=s) = (1/s) sum_j a[j] Pr(S=s-j).
  const std::size_t support = std::min<std::size_t>(rate_by_loss.empty() ? 0 : rate_by_loss.size() - 1,
                                                    static_cast<std::size_t>(s_max));
  std::vector<double> a(support + 1, 0.0);
  double positive_rate = extra_positive_rate;
  for (std::size_t j = 1; j < rate_by_loss.size(); ++j) positive_rate += rate_by_loss[j];
  for (std::size_t j = 1; j <= support; ++j) a[j] = static_cast<double>(j) * rate_by_loss[j] * horizon;

  const double log_f0 = -positive_rate * horizon;
  std::vector<double> g(static_cast<std::size_t>(s_max) + 1, 0.0);
  // True probabilities are g[s] * exp(log_scale).
  double log_scale = 0.0;
  if (log_f0 > -700.0) {
    g[0] = std::exp(log_f0);
  } else {
    g[0] = 1.0;
    log_scale = log_f0;
  }
  double cumulative = std::exp(log_f0);
  double compensation = 0.0;
  long long last = s_max;

  for (long long s = 1; s <= s_max; ++s) {
    const std::size_t top = std::min<std::size_t>(support, static_cast<std::size_t>(s));
    const double* gs = g.data() + s;
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    std::size_t j = 1;
    for (; j + 3 <= top; j += 4) {
      acc0 += a[j] * gs[-static_cast<std::ptrdiff_t>(j)];
      acc1 += a[j + 1] * gs[-static_cast<std::ptrdiff_t>(j + 1)];
      acc2 += a[j + 2] * gs[-static_cast<std::ptrdiff_t>(j + 2)];
      acc3 += a[j + 3] * gs[-static_cast<std::ptrdiff_t>(j + 3)];
    }
    for (; j <= top; ++j) acc0 += a[j] * gs[-static_cast<std::ptrdiff_t>(j)];
    const double value = ((acc0 + acc1) + (acc2 + acc3)) / static_cast<double>(s);
    g[static_cast<std::size_t>(s)] = value;

    if (value > kRescaleAbove) {
      for (long long r = 0; r <= s; ++r) g[static_cast<std::size_t>(r)] /= kRescaleAbove;
      log_scale += std::log(kRescaleAbove);
    }
    if (log_scale > -745.0) {
      // Kahan sum of the true probabilities.
      const double y = g[static_cast<std::size_t>(s)] * std::exp(log_scale) - compensation;
      const double t = cumulative + y;
      compensation = (t - cumulative) - y;
      cumulative = t;
    }
    if (cumulative >= kCumulativeStop) {
      last = s;
      if (stopped_early) *stopped_early = s < s_max;
      break;
    }
  }

  std::vector<double> pmf(static_cast<std::size_t>(s_max) + 1, 0.0);
  const double factor = std::exp(log_scale);
  for (long long s = 0; s <= last; ++s) pmf[static_cast<std::size_t>(s)] = g[static_cast<std::size_t>(s)] * factor;
  return pmf;
}

PanjerResult panjer_exceedance(const EventLossTable& elt, double horizon, const PanjerConfig& config) {
  if (config.s_max < 1) throw std::invalid_argument("s_max must be >= 1");
  const EventLossTable expanded = elt.all_point_mass() ? elt : expand_quantiles(elt, config.n_q);
  const EventLossTable integral = compress_elt(expanded, config.d);

  std::map<long long, double> by_key;
  for (const auto& r : integral.rows()) {
    const double key = r.severity.fixed_loss();
    if (key < 0.0 || key != std::floor(key)) throw std::invalid_argument("Panjer needs non-negative integer losses");
    by_key[static_cast<long long>(key)] += r.rate;
  }
  const long long max_key = by_key.rbegin()->first;
  const long long support = std::min(max_key, config.s_max);
  const double work = static_cast<double>(config.s_max) * static_cast<double>(std::max(1LL, support));
  if (work > config.max_work || config.s_max > kMaxPoints) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "Panjer recursion needs ~%.3g operations (limit %.3g); compress further", work,
                  config.max_work);
    throw PanjerInfeasible(msg);
  }

  std::vector<double> rate_by_loss(static_cast<std::size_t>(support) + 1, 0.0);
  double beyond = 0.0;
  for (const auto& [key, rate] : by_key) {
    if (key <= support)
      rate_by_loss[static_cast<std::size_t>(key)] += rate;
    else
      beyond += rate;
  }

  PanjerResult out;
  out.unit = integral.loss_unit();
  out.pmf = panjer_pmf(rate_by_loss, horizon, config.s_max, &out.stopped_early, beyond);
  out.exceedance.resize(out.pmf.size());
  double cumulative = 0.0;
  double compensation = 0.0;
  for (std::size_t s = 0; s < out.pmf.size(); ++s) {
    out.exceedance[s] = std::clamp(1.0 - cumulative, 0.0, 1.0);
    const double y = out.pmf[s] - compensation;
    const double t = cumulative + y;
    compensation = (t - cumulative) - y;
    cumulative = t;
  }
  if (out.stopped_early) {
    // Past the last computed mass the remaining tail is below 1e-15.
    std::size_t last = out.pmf.size();
    while (last > 0 && out.pmf[last - 1] == 0.0) --last;
    std::fill(out.exceedance.begin() + static_cast<std::ptrdiff_t>(last), out.exceedance.end(), 0.0);
  }
  return out;
}

}  // namespace eltbound
