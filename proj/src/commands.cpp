#include "eltbound/commands.hpp"

#include "eltbound/bounds.hpp"
#include "eltbound/panjer.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace eltbound::cli {

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string probability_text(double p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", p);
  return buf;
}

double parse_double(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw std::invalid_argument("bad " + std::string(what) + " '" + std::string(text) + "'");
  return v;
}

// Writes through fn to path, or to stdout when path is empty.
template <typename Fn>
void emit(const std::filesystem::path& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  fn(out);
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Markov: return "markov";
    case Method::Cantelli: return "cantelli";
    case Method::Moment: return "moment";
    case Method::Chernoff: return "chernoff";
    case Method::MonteCarlo: return "montecarlo";
    case Method::Panjer: return "panjer";
  }
  return "unknown";
}

std::vector<Method> parse_methods(std::string_view list) {
  static constexpr Method kAll[] = {Method::Panjer, Method::MonteCarlo, Method::Moment,
                                    Method::Chernoff, Method::Cantelli, Method::Markov};
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto comma = list.find(',', start);
    auto item = list.substr(start, comma == std::string_view::npos ? list.npos : comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item == "all") {
      for (Method m : kAll)
        if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    } else {
      const auto* it = std::find_if(std::begin(kAll), std::end(kAll), [&](Method m) { return to_string(m) == item; });
      if (it == std::end(kAll)) throw std::invalid_argument("unknown method '" + std::string(item) + "'");
      if (std::find(out.begin(), out.end(), *it) == out.end()) out.push_back(*it);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("no methods requested");
  return out;
}

std::vector<double> GridSpec::points() const {
  std::vector<double> pts(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) pts[static_cast<std::size_t>(i)] = min + (max - min) * i / (count - 1);
  pts.back() = max;
  return pts;
}

GridSpec parse_grid(std::string_view text) {
  GridSpec g;
  const auto c1 = text.find(':');
  if (c1 == std::string_view::npos) throw std::invalid_argument("grid must be min:max[:count]");
  const auto c2 = text.find(':', c1 + 1);
  g.min = parse_double(text.substr(0, c1), "grid minimum");
  g.max = parse_double(text.substr(c1 + 1, c2 == std::string_view::npos ? text.npos : c2 - c1 - 1), "grid maximum");
  if (c2 != std::string_view::npos) {
    const auto count_text = text.substr(c2 + 1);
    const auto [ptr, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), g.count);
    if (ec != std::errc() || ptr != count_text.data() + count_text.size())
      throw std::invalid_argument("bad grid count '" + std::string(count_text) + "'");
  }
  if (g.count < 2) throw std::invalid_argument("grid needs at least 2 points");
  if (!(g.min < g.max)) throw std::invalid_argument("grid minimum must be below its maximum");
  return g;
}

EventLossTable prepare_elt(const EventLossTable& input, const CurveOptions& options) {
  if (!(options.t > 0.0)) throw std::invalid_argument("--t must be > 0");
  if (!(options.theta >= 0.0)) throw std::invalid_argument("--theta must be >= 0");
  EventLossTable elt = input;
  if (options.cap && elt.all_point_mass()) elt = apply_cap(elt, *options.cap);
  if (options.d && elt.all_point_mass()) elt = compress_elt(elt, *options.d);
  if (options.theta > 0.0) elt = thicken(elt, options.theta);
  if (options.cap) elt = apply_cap(elt, *options.cap);
  return elt;
}

CurveRun run_curve(const EventLossTable& input, const CurveOptions& options) {
  const EventLossTable elt = prepare_elt(input, options);
  const CompoundModel model = to_compound_model(elt, options.t);

  CurveRun run;
  if (options.grid) {
    run.thresholds = options.grid->points();
  } else {
    GridSpec g;
    g.max = model.mean() + 8.0 * std::sqrt(model.variance());
    run.thresholds = g.points();
  }

  for (Method method : options.methods) {
    MethodTiming timing{std::string(to_string(method)), std::nullopt, {}};
    try {
      const auto start = std::chrono::steady_clock::now();
      ExceedanceCurve curve;
      switch (method) {
        case Method::Markov:
        case Method::Cantelli:
        case Method::Moment:
        case Method::Chernoff: {
          static constexpr BoundMethod kMap[] = {BoundMethod::Markov, BoundMethod::Cantelli, BoundMethod::Moment,
                                                 BoundMethod::Chernoff};
          BoundRequest req{model, run.thresholds, kMap[static_cast<int>(method)], std::nullopt,
                           options.chernoff_grid};
          curve = exceedance_curve(req);
          break;
        }
        case Method::MonteCarlo: {
          McConfig cfg;
          cfg.n = options.nsim;
          cfg.seed = options.seed;
          cfg.cap = options.cap;
          std::vector<double> losses;
          curve = monte_carlo_curve(model, run.thresholds, cfg, options.dump_losses.empty() ? nullptr : &losses);
          if (!options.dump_losses.empty()) emit(options.dump_losses, [&](std::ostream& o) { write_losses(o, losses); });
          break;
        }
        case Method::Panjer: {
          PanjerConfig cfg;
          cfg.n_q = options.n_q;
          cfg.d = options.d.value_or(0);
          cfg.max_work = options.panjer_max_work;
          const double steps = std::ceil(run.thresholds.back() * std::pow(10.0, cfg.d) - 1e-9);
          if (steps > 1e15) throw PanjerInfeasible("threshold range too fine for Panjer recursion");
          cfg.s_max = std::max(1LL, static_cast<long long>(steps));
          const PanjerResult res = panjer_exceedance(elt, options.t, cfg);
          curve.method = "panjer";
          curve.thresholds = run.thresholds;
          for (double s : run.thresholds) curve.values.push_back(res.exceedance_at(s));
          break;
        }
      }
      curve.seconds = elapsed_since(start);
      timing.seconds = curve.seconds;
      run.curves.push_back(std::move(curve));
    } catch (const UnsupportedOperation& e) {
      timing.error = e.what();
    } catch (const std::runtime_error& e) {
      timing.error = e.what();
    } catch (const std::domain_error& e) {
      timing.error = e.what();
    }
    run.timings.push_back(std::move(timing));
  }
  return run;
}

void write_curve_csv(std::ostream& out, const CurveRun& run) {
  out << 's';
  for (const auto& t : run.timings) {
    out << ',' << t.method;
    if (t.method == "montecarlo") out << ",montecarlo_lo,montecarlo_hi";
  }
  out << '\n';
  for (std::size_t i = 0; i < run.thresholds.size(); ++i) {
    char s_text[32];
    std::snprintf(s_text, sizeof s_text, "%.15g", run.thresholds[i]);
    out << s_text;
    for (const auto& t : run.timings) {
      const auto it = std::find_if(run.curves.begin(), run.curves.end(),
                                   [&](const ExceedanceCurve& c) { return c.method == t.method; });
      const bool interval = t.method == "montecarlo";
      if (it == run.curves.end()) {
        out << (interval ? ",NA,NA,NA" : ",NA");
        continue;
      }
      out << ',' << probability_text(it->values[i]);
      if (interval) out << ',' << probability_text(it->lower[i]) << ',' << probability_text(it->upper[i]);
    }
    out << '\n';
  }
}

void write_timing_csv(std::ostream& out, const CurveRun& run) {
  out << "method,seconds\n";
  char buf[64];
  for (const auto& t : run.timings) {
    if (t.seconds) {
      std::snprintf(buf, sizeof buf, "%.3f", *t.seconds);
      out << t.method << ',' << buf << '\n';
    } else {
      out << t.method << ",NA\n";
    }
  }
}

EventLossTable synthetic_elt(std::size_t rows, std::uint64_t seed) {
  if (rows < 1) throw std::invalid_argument("synthetic table needs at least one row");
  Rng rng(seed);
  std::uniform_real_distribution<double> log_rate(-4.0, -1.0);
  std::uniform_real_distribution<double> log_loss(4.0, 8.0);
  std::vector<EltRow> out;
  out.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const double rate = std::pow(10.0, log_rate(rng));
    const double loss = std::round(std::pow(10.0, log_loss(rng)));
    out.push_back({std::to_string(i + 1), rate, Severity::point_mass(loss)});
  }
  return EventLossTable(std::move(out));
}

int cmd_compress(const CompressOptions& options, std::ostream& log) {
  try {
    const EventLossTable in = read_elt(options.input);
    const EventLossTable out = compress_elt(in, options.d, options.drop_zero);
    emit(options.output, [&](std::ostream& o) { write_elt(o, out); });
    log << "rows: " << in.size() << " -> " << out.size() << "\n"
        << "loss unit: " << shortest(out.loss_unit()) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

int cmd_curve(const CurveOptions& options, std::ostream& log) {
  CurveRun run;
  try {
    const EventLossTable elt = read_elt(options.input);
    run = run_curve(elt, options);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  for (const auto& t : run.timings)
    if (!t.seconds) log << t.method << " failed: " << t.error << "\n";
  if (run.curves.empty()) {
    log << "error: every requested method failed\n";
    return kExitNumericFailure;
  }
  try {
    emit(options.out, [&](std::ostream& o) { write_curve_csv(o, run); });
    if (!options.timing_out.empty()) emit(options.timing_out, [&](std::ostream& o) { write_timing_csv(o, run); });
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}

int cmd_design_n(const DesignOptions& options, std::ostream& log) {
  std::vector<DesignPoint> points;
  try {
    auto ns = options.ns;
    std::sort(ns.begin(), ns.end());
    points = design_sample_size(options.spec, ns);
    const auto best = recommend_sample_size(points, options.spec.beta0);
    emit(options.out, [&](std::ostream& o) {
      o << "n,success_probability\n";
      for (const auto& p : points) o << p.n << ',' << probability_text(p.success_probability) << '\n';
    });
    if (best)
      log << "recommended n: " << *best << "\n";
    else
      log << "no listed n reaches beta0 = " << shortest(options.spec.beta0) << "\n";
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}

int cmd_synth(std::size_t rows, std::uint64_t seed, const std::filesystem::path& output, std::ostream& log) {
  try {
    const EventLossTable elt = synthetic_elt(rows, seed);
    emit(output, [&](std::ostream& o) { write_elt(o, elt); });
    log << "rows: " << elt.size() << "\n";
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}

int cmd_inspect(const std::filesystem::path& input, double t, std::ostream& out) {
  try {
    const EventLossTable elt = read_elt(input);
    const CompoundModel model = to_compound_model(elt, t);
    out << "rows: " << elt.size() << "\n"
        << "severities: " << (elt.all_point_mass() ? "fixed" : "random") << "\n"
        << "total rate: " << shortest(elt.total_rate()) << "\n"
        << "horizon: " << shortest(t) << "\n"
        << "mean loss: " << shortest(model.mean()) << "\n"
        << "sd loss: " << shortest(std::sqrt(model.variance())) << "\n";
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}

}  // namespace eltbound::cli
