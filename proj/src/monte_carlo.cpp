#include "eltbound/monte_carlo.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace eltbound {

namespace {

void check_alpha(double alpha_level) {
  if (!(alpha_level > 0.0 && alpha_level < 1.0)) throw std::invalid_argument("alpha level must lie in (0, 1)");
}

Rng block_rng(std::uint64_t seed, std::uint64_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
  return Rng(seq);
}

// Walker/Vose alias table: O(1) draws of a component index.
class AliasTable {
 public:
  explicit AliasTable(const std::vector<double>& weights) : prob_(weights.size()), alias_(weights.size()) {
    const std::size_t m = weights.size();
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<double> scaled(m);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < m; ++i) {
      scaled[i] = weights[i] * static_cast<double>(m) / total;
      (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const std::size_t lo = small.back();
      small.pop_back();
      const std::size_t hi = large.back();
      prob_[lo] = scaled[lo];
      alias_[lo] = hi;
      scaled[hi] -= 1.0 - scaled[lo];
      if (scaled[hi] < 1.0) {
        large.pop_back();
        small.push_back(hi);
      }
    }
    for (std::size_t i : large) prob_[i] = 1.0, alias_[i] = i;
    for (std::size_t i : small) prob_[i] = 1.0, alias_[i] = i;
  }

  std::size_t operator()(Rng& rng) const {
    const double u = std::generate_canonical<double, 64>(rng) * static_cast<double>(prob_.size());
    const auto column = std::min(static_cast<std::size_t>(u), prob_.size() - 1);
    return (u - static_cast<double>(column)) < prob_[column] ? column : alias_[column];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

}  // namespace

std::vector<double> simulate_annual_losses(const CompoundModel& model, const McConfig& config) {
  if (config.n < 1) throw std::invalid_argument("Monte Carlo needs n >= 1");
  check_alpha(config.alpha_level);
  if (config.cap && !(*config.cap > 0.0)) throw std::invalid_argument("cap must be > 0");
  const std::size_t block_size = std::max<std::size_t>(config.block_size, 1);

  const auto& comps = model.components();
  std::vector<double> weights;
  weights.reserve(comps.size());
  for (const auto& c : comps) weights.push_back(c.weight);
  const AliasTable pick(weights);
  // Fixed losses are looked up directly; NaN marks a random severity.
  std::vector<double> fixed(comps.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < comps.size(); ++i)
    if (comps[i].severity.is_point_mass()) fixed[i] = comps[i].severity.fixed_loss();
  const double mean_count = model.expected_count();
  const std::optional<double> cap = config.cap;

  std::vector<double> out(config.n, 0.0);
  const std::size_t blocks = (config.n + block_size - 1) / block_size;

  const auto run_block = [&](std::size_t b) {
    Rng rng = block_rng(config.seed, b);
    std::poisson_distribution<long long> count(mean_count);
    const std::size_t first = b * block_size;
    const std::size_t last = std::min(config.n, first + block_size);
    for (std::size_t r = first; r < last; ++r) {
      const long long events = count(rng);
      double total = 0.0;
      for (long long e = 0; e < events; ++e) {
        const std::size_t i = pick(rng);
        double loss = std::isnan(fixed[i]) ? comps[i].severity.sample(rng) : fixed[i];
        if (cap) loss = std::min(loss, *cap);
        total += loss;
      }
      out[r] = total;
    }
  };

  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, blocks));
  if (threads <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned i = 0; i < threads; ++i) {
    pool.emplace_back([&] {
      for (std::size_t b = next++; b < blocks; b = next++) run_block(b);
    });
  }
  pool.clear();
  return out;
}

double jeffreys_upper(std::size_t x, std::size_t n, double alpha_level) {
  check_alpha(alpha_level);
  if (n == 0 || x > n) throw std::invalid_argument("need 0 <= x <= n and n >= 1");
  if (x == n) return 1.0;
  return boost::math::ibeta_inv(static_cast<double>(x) + 0.5, static_cast<double>(n - x) + 0.5,
                                1.0 - alpha_level / 2.0);
}

EstimateWithCI jeffreys_interval(std::size_t x, std::size_t n, double alpha_level) {
  EstimateWithCI e;
  e.x = x;
  e.n = n;
  e.upper = jeffreys_upper(x, n, alpha_level);
  e.p_hat = static_cast<double>(x) / static_cast<double>(n);
  e.lower = x == 0 ? 0.0
                   : boost::math::ibeta_inv(static_cast<double>(x) + 0.5, static_cast<double>(n - x) + 0.5,
                                            alpha_level / 2.0);
  return e;
}

EstimateWithCI estimate_exceedance(std::span<const double> losses, double s0, double alpha_level) {
  if (losses.empty()) throw std::invalid_argument("no simulated losses");
  const auto x = static_cast<std::size_t>(
      std::count_if(losses.begin(), losses.end(), [s0](double l) { return l >= s0; }));
  return jeffreys_interval(x, losses.size(), alpha_level);
}

ExceedanceCurve monte_carlo_curve(const CompoundModel& model, const std::vector<double>& thresholds,
                                  const McConfig& config, std::vector<double>* losses_out) {
  const auto start = std::chrono::steady_clock::now();
  auto losses = simulate_annual_losses(model, config);
  if (losses_out) *losses_out = losses;
  std::sort(losses.begin(), losses.end());
  ExceedanceCurve curve;
  curve.method = "montecarlo";
  curve.thresholds = thresholds;
  for (double s : thresholds) {
    const auto below = static_cast<std::size_t>(std::lower_bound(losses.begin(), losses.end(), s) - losses.begin());
    const auto e = jeffreys_interval(losses.size() - below, losses.size(), config.alpha_level);
    curve.values.push_back(e.p_hat);
    curve.lower.push_back(e.lower);
    curve.upper.push_back(e.upper);
  }
  curve.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return curve;
}

void write_losses(std::ostream& out, std::span<const double> losses) {
  out << "replicate,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < losses.size(); ++i) {
    const auto res = std::to_chars(buf, buf + sizeof buf, losses[i]);
    out << (i + 1) << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
  }
}

std::vector<DesignPoint> design_sample_size(const DesignSpec& spec, std::span<const std::size_t> candidate_ns) {
  if (!(spec.p0 > 0.0 && spec.p0 < spec.kappa0 && spec.kappa0 < 1.0))
    throw std::invalid_argument("design needs 0 < p0 < kappa0 < 1");
  check_alpha(spec.alpha_level);

  std::vector<DesignPoint> out;
  out.reserve(candidate_ns.size());
  for (std::size_t n : candidate_ns) {
    if (n < 1) throw std::invalid_argument("sample sizes must be positive");
    DesignPoint pt;
    pt.n = n;
    if (jeffreys_upper(0, n, spec.alpha_level) > spec.kappa0) {
      out.push_back(pt);  // even x = 0 fails: success probability 0
      continue;
    }
    // u(x; n) increases with x and u(n; n) = 1 > kappa0.
    std::size_t lo = 0;
    std::size_t hi = n;
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (jeffreys_upper(mid, n, spec.alpha_level) <= spec.kappa0)
        lo = mid;
      else
        hi = mid;
    }
    pt.max_x = lo;

    const boost::math::binomial_distribution<double> binom(static_cast<double>(n), spec.p0);
    const double lo_x = static_cast<double>(lo);
    pt.success_probability = boost::math::cdf(binom, lo_x);
    pt.log_failure_probability = std::log(boost::math::cdf(boost::math::complement(binom, lo_x)));
    out.push_back(pt);
  }
  return out;
}

std::optional<std::size_t> recommend_sample_size(std::span<const DesignPoint> points, double beta0) {
  if (!(beta0 > 0.0 && beta0 <= 1.0)) throw std::invalid_argument("beta0 must lie in (0, 1]");
  // Failure probability is positive for every finite n, so beta0 = 1 is never met.
  if (beta0 == 1.0) return std::nullopt;
  const double log_allowed = std::log1p(-beta0);
  std::optional<std::size_t> best;
  for (const auto& p : points) {
    if (!p.max_x) continue;
    if (p.log_failure_probability <= log_allowed && (!best || p.n < *best)) best = p.n;
  }
  return best;
}

}  // namespace eltbound
