#pragma once

// Experiment configs, the (algorithm, eta) grid runner and its report.

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ogda/analysis.hpp"
#include "ogda/equilibrium.hpp"
#include "ogda/error.hpp"
#include "ogda/io.hpp"
#include "ogda/problems.hpp"
#include "ogda/solvers.hpp"

namespace ogda {

inline constexpr const char* kVersion = "0.1.0";

enum class Preset { kFig1, kCurved, kStronglyConvex, kPowerToy, kMultiNe, kCustom };
enum class Metric { kKl, kDist2, kGap, kAvgGap, kTheta };
enum class Algorithm { kOgda, kOmwu };

inline std::string to_string(Preset p) {
  switch (p) {
    case Preset::kFig1: return "fig1";
    case Preset::kCurved: return "curved";
    case Preset::kStronglyConvex: return "strongly_convex";
    case Preset::kPowerToy: return "power_toy";
    case Preset::kMultiNe: return "multi_ne";
    case Preset::kCustom: return "custom";
  }
  return "?";
}

inline std::string to_string(Metric m) {
  switch (m) {
    case Metric::kKl: return "kl";
    case Metric::kDist2: return "dist2";
    case Metric::kGap: return "gap";
    case Metric::kAvgGap: return "avg_gap";
    case Metric::kTheta: return "theta";
  }
  return "?";
}

inline std::string to_string(Algorithm a) { return a == Algorithm::kOgda ? "OGDA" : "OMWU"; }

inline std::optional<Preset> parse_preset(const std::string& s) {
  for (Preset p : {Preset::kFig1, Preset::kCurved, Preset::kStronglyConvex, Preset::kPowerToy, Preset::kMultiNe,
                   Preset::kCustom})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

inline std::optional<Metric> parse_metric(const std::string& s) {
  for (Metric m : {Metric::kKl, Metric::kDist2, Metric::kGap, Metric::kAvgGap, Metric::kTheta})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

inline bool is_matrix_preset(Preset p) {
  return p == Preset::kFig1 || p == Preset::kMultiNe || p == Preset::kCustom;
}

struct ExperimentConfig {
  Preset preset = Preset::kFig1;
  std::size_t m = 32;
  std::size_t n_cols = 32;
  std::uint64_t seed = 1;
  int n = 2;
  Vector eta_list;
  std::size_t steps = 0;
  std::vector<Metric> metrics;
  std::string output_dir = "out";
  bool emit_svg = false;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline Vector default_etas(Preset p) {
  switch (p) {
    case Preset::kFig1: return {0.125, 0.25, 0.5, 1, 2, 5, 10};
    case Preset::kCurved: return {1.0 / 64};
    case Preset::kStronglyConvex: return {1.0 / (8.0 * smoothness(strongly_convex_toy(), NormPair::kL2))};
    default: return {0.125};
  }
}

inline std::vector<Metric> default_metrics(Preset p) {
  if (is_matrix_preset(p)) return {Metric::kKl, Metric::kDist2, Metric::kGap};
  return {Metric::kDist2};
}

inline std::vector<Algorithm> algorithms_for(Preset p) {
  if (is_matrix_preset(p)) return {Algorithm::kOgda, Algorithm::kOmwu};
  return {Algorithm::kOgda};
}

inline Axes axes_for(Preset p) {
  return p == Preset::kCurved || p == Preset::kPowerToy ? Axes::kLogLog : Axes::kLogY;
}

/// Throws ValidationError on invariant breaches.
inline void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& m) { raise(ErrorCode::kValidationError, m); };
  if (c.eta_list.empty()) fail("eta_list must not be empty");
  for (double e : c.eta_list)
    if (!(e > 0.0) || !std::isfinite(e)) fail("eta_list entries must be positive, got " + format_shortest(e));
  if (c.steps < 1) fail("steps must be at least 1");
  if (c.metrics.empty()) fail("metrics must not be empty");
  const bool matrix = is_matrix_preset(c.preset);
  for (Metric m : c.metrics) {
    if (!matrix && (m == Metric::kKl || m == Metric::kGap || m == Metric::kAvgGap)) {
      fail("metric " + to_string(m) + " is only available for matrix presets");
    }
  }
  if (c.m < 1 || c.n_cols < 1) fail("problem.M and problem.N must be positive");
  if (c.n < 2) fail("problem.n must be at least 2");
  if (c.output_dir.empty()) fail("output_dir must not be empty");
}

namespace detail {

inline std::string where(const YAML::Node& node) {
  const auto mark = node.Mark();
  if (mark.line < 0) return "";
  return " (line " + std::to_string(mark.line + 1) + ")";
}

[[noreturn]] inline void parse_fail(const std::string& field, const YAML::Node& node, const std::string& what) {
  raise(ErrorCode::kParseError, field + where(node) + ": " + what);
}

template <class T>
T scalar_as(const std::string& field, const YAML::Node& node) {
  if (!node.IsScalar()) parse_fail(field, node, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    parse_fail(field, node, "cannot read '" + node.Scalar() + "'");
  }
}

/// Accepts plain numbers and fractions such as 1/64.
inline double parse_number(const std::string& field, const YAML::Node& node) {
  if (!node.IsScalar()) parse_fail(field, node, "expected a number");
  const std::string s = node.Scalar();
  auto read = [&](const std::string& part) {
    double v = 0.0;
    const char* b = part.data();
    const char* e = b + part.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) parse_fail(field, node, "not a number: '" + s + "'");
    return v;
  };
  const auto slash = s.find('/');
  if (slash == std::string::npos) return read(s);
  return read(s.substr(0, slash)) / read(s.substr(slash + 1));
}

inline std::size_t parse_count(const std::string& field, const YAML::Node& node) {
  const double v = parse_number(field, node);
  if (!(v >= 0.0) || v != std::floor(v) || v > 9e15) parse_fail(field, node, "expected a nonnegative integer");
  return static_cast<std::size_t>(v);
}

}  // namespace detail

/// Parses the YAML config and fills preset defaults for omitted keys.
inline ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    raise(ErrorCode::kParseError, std::string("malformed document: ") + e.what());
  }
  if (!root.IsMap()) raise(ErrorCode::kParseError, "top level must be a mapping");

  const std::set<std::string> top_keys{"preset", "problem", "eta_list", "steps", "metrics", "output_dir", "emit_svg"};
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!top_keys.count(key)) detail::parse_fail(key, kv.first, "unknown key");
  }
  if (!root["preset"]) raise(ErrorCode::kParseError, "preset: required key missing");

  ExperimentConfig c;
  const auto preset_name = detail::scalar_as<std::string>("preset", root["preset"]);
  const auto preset = parse_preset(preset_name);
  if (!preset) detail::parse_fail("preset", root["preset"], "unknown preset '" + preset_name + "'");
  c.preset = *preset;

  bool have_m = false, have_n_cols = false, have_seed = false, have_n = false;
  if (const auto prob = root["problem"]) {
    if (!prob.IsMap()) detail::parse_fail("problem", prob, "expected a mapping");
    for (const auto& kv : prob) {
      const auto key = kv.first.as<std::string>();
      const std::string field = "problem." + key;
      if (key == "M") {
        c.m = detail::parse_count(field, kv.second), have_m = true;
      } else if (key == "N") {
        c.n_cols = detail::parse_count(field, kv.second), have_n_cols = true;
      } else if (key == "seed") {
        c.seed = detail::scalar_as<std::uint64_t>(field, kv.second), have_seed = true;
      } else if (key == "n") {
        c.n = static_cast<int>(detail::parse_count(field, kv.second)), have_n = true;
      } else {
        detail::parse_fail(field, kv.first, "unknown key");
      }
    }
  }
  const bool random_game = c.preset == Preset::kFig1 || c.preset == Preset::kCustom;
  const bool has_n = c.preset == Preset::kCurved || c.preset == Preset::kPowerToy;
  if ((have_m || have_n_cols || have_seed) && !random_game) {
    raise(ErrorCode::kValidationError, "problem.M/N/seed only apply to the fig1 and custom presets");
  }
  if (have_n && !has_n) raise(ErrorCode::kValidationError, "problem.n only applies to the curved and power_toy presets");

  if (const auto etas = root["eta_list"]) {
    if (etas.IsSequence()) {
      for (std::size_t i = 0; i < etas.size(); ++i)
        c.eta_list.push_back(detail::parse_number("eta_list[" + std::to_string(i) + "]", etas[i]));
    } else {
      c.eta_list.push_back(detail::parse_number("eta_list", etas));
    }
  } else {
    c.eta_list = default_etas(c.preset);
  }
  c.steps = root["steps"] ? detail::parse_count("steps", root["steps"])
                          : (c.preset == Preset::kFig1 ? 1000000 : 10000);
  if (const auto ms = root["metrics"]) {
    if (!ms.IsSequence()) detail::parse_fail("metrics", ms, "expected a list");
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const std::string field = "metrics[" + std::to_string(i) + "]";
      const auto name = detail::scalar_as<std::string>(field, ms[i]);
      const auto m = parse_metric(name);
      if (!m) detail::parse_fail(field, ms[i], "unknown metric '" + name + "'");
      c.metrics.push_back(*m);
    }
  } else {
    c.metrics = default_metrics(c.preset);
  }
  if (const auto od = root["output_dir"]) c.output_dir = detail::scalar_as<std::string>("output_dir", od);
  if (const auto sv = root["emit_svg"]) c.emit_svg = detail::scalar_as<bool>("emit_svg", sv);

  validate(c);
  return c;
}

/// Full config with every key explicit; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "preset: " << to_string(c.preset) << "\n";
  if (c.preset == Preset::kFig1 || c.preset == Preset::kCustom) {
    os << "problem:\n  M: " << c.m << "\n  N: " << c.n_cols << "\n  seed: " << c.seed << "\n";
  } else if (c.preset == Preset::kCurved || c.preset == Preset::kPowerToy) {
    os << "problem:\n  n: " << c.n << "\n";
  }
  os << "eta_list: [";
  for (std::size_t i = 0; i < c.eta_list.size(); ++i) os << (i ? ", " : "") << format_shortest(c.eta_list[i]);
  os << "]\nsteps: " << c.steps << "\nmetrics: [";
  for (std::size_t i = 0; i < c.metrics.size(); ++i) os << (i ? ", " : "") << to_string(c.metrics[i]);
  os << "]\noutput_dir: \"" << c.output_dir << "\"\nemit_svg: " << (c.emit_svg ? "true" : "false") << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Running

struct CellResult {
  Algorithm algorithm = Algorithm::kOgda;
  double eta = 0.0;
  std::optional<std::size_t> diverged_at;
  std::vector<std::string> warnings;
  std::map<Metric, MetricSeries> series;
  std::map<Metric, RateFit> fits;
  std::optional<std::string> error;
  ErrorCode error_code = ErrorCode::kUnsupported;

  std::string label() const { return to_string(algorithm) + "-eta=" + format_shortest(eta); }
};

struct ExperimentReport {
  ExperimentConfig config;
  std::optional<EquilibriumInfo> equilibrium;
  std::vector<CellResult> cells;
  std::vector<std::string> manifest;

  bool any_diverged() const {
    return std::any_of(cells.begin(), cells.end(), [](const CellResult& c) { return c.diverged_at.has_value(); });
  }
  const CellResult* find(Algorithm a, double eta) const {
    for (const auto& c : cells)
      if (c.algorithm == a && c.eta == eta) return &c;
    return nullptr;
  }
};

inline Problem build_problem(const ExperimentConfig& c) {
  switch (c.preset) {
    case Preset::kFig1:
    case Preset::kCustom: return random_matrix_game(c.m, c.n_cols, c.seed);
    case Preset::kMultiNe: return multi_ne_game();
    case Preset::kCurved: return curved_bilinear(c.n);
    case Preset::kStronglyConvex: return strongly_convex_toy();
    case Preset::kPowerToy: return power_toy(c.n);
  }
  raise(ErrorCode::kValidationError, "unknown preset");
}

/// Uniform point for simplex games; the corner (1/2, 1/2^n) for curved regions.
inline JointPoint default_initial(const ExperimentConfig& c, const Problem& p) {
  if (c.preset == Preset::kCurved) {
    const double b = std::ldexp(1.0, -c.n);
    return {{0.5, b}, {0.5, b}};
  }
  return uniform_joint(p.x_set.dim(), p.y_set.dim());
}

/// Values at or below this are treated as having reached the rounding floor.
inline constexpr double kFitFloor = 1e-20;

/// Length of the prefix that is finite and above kFitFloor.
inline std::size_t fit_prefix(const Vector& v) {
  std::size_t k = 0;
  while (k < v.size() && std::isfinite(v[k]) && v[k] > kFitFloor) ++k;
  return k;
}

/// Rate fit over the second half of the usable prefix: log-linear for
/// log_y presets, log-log for log_log presets.
inline std::optional<RateFit> tail_fit(const MetricSeries& s, Axes axes) {
  const std::size_t n = fit_prefix(s.values);
  std::size_t begin = n / 2;
  if (axes == Axes::kLogLog && begin + s.t_offset == 0) begin = 1;
  if (n < begin + 3) return std::nullopt;
  const IndexRange w{begin, n};
  return axes == Axes::kLogLog ? fit_log_log(s.values, w, s.t_offset) : fit_log_linear(s.values, w);
}

namespace detail {

inline CellResult run_cell(const ExperimentConfig& cfg, const Problem& problem, const std::optional<EquilibriumInfo>& eq,
                           Algorithm algo, double eta) {
  CellResult cell;
  cell.algorithm = algo;
  cell.eta = eta;
  SolverConfig sc;
  sc.regularizer = algo == Algorithm::kOmwu ? Regularizer::kEntropy : Regularizer::kEuclidean;
  sc.eta = eta;
  sc.steps = cfg.steps;
  sc.initial = default_initial(cfg, problem);
  sc.record_secondary = false;

  const JointPoint z_star = eq ? eq->z_star() : *problem.known_equilibrium;
  std::optional<EquilibriumSet> eqset;
  if (eq) eqset.emplace(*eq);
  const bool unique = !eq || eq->unique;
  std::optional<LyapunovAccumulator> lyap;
  const DenseMatrix* g = problem.matrix();

  std::map<Metric, Vector> vals;
  for (Metric m : cfg.metrics) vals[m].reserve(cfg.steps + 1);
  double gap_sum = 0.0;
  bool theta_undefined = false;

  // OMWU leaves the regime the theory covers once KL(z*, z_t) is infinite,
  // i.e. a coordinate in the equilibrium support underflows to 0.
  std::function<bool(const JointPoint&)> support_lost;
  if (algo == Algorithm::kOmwu && eq) {
    support_lost = [&](const JointPoint& z) {
      for (std::size_t i : eq->supp_x)
        if (z.x[i] == 0.0) return true;
      for (std::size_t j : eq->supp_y)
        if (z.y[j] == 0.0) return true;
      return false;
    };
  }
  auto observe = [&](std::size_t t, const JointPoint& z, const JointPoint& z_hat_next) {
    std::optional<JointPoint> proj;
    auto projection = [&]() -> const JointPoint& {
      if (!proj) proj = unique ? z_star : eqset->project(z);
      return *proj;
    };
    for (Metric m : cfg.metrics) {
      double v = 0.0;
      switch (m) {
        case Metric::kKl:
          try {
            v = kl_joint(projection(), z);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::kDomainError) throw;
            v = INFINITY;
          }
          break;
        case Metric::kDist2: v = dist_sq(z, projection()); break;
        case Metric::kGap: v = duality_gap_matrix(*g, z); break;
        case Metric::kAvgGap:
          if (t == 0) continue;  // average over t = 1..T'
          gap_sum += duality_gap_matrix(*g, z);
          v = gap_sum / static_cast<double>(t);
          break;
        case Metric::kTheta:
          if (theta_undefined) {
            v = INFINITY;
            break;
          }
          if (!lyap) lyap = eq ? LyapunovAccumulator(sc.regularizer, *eq) : LyapunovAccumulator(sc.regularizer, z_star);
          try {
            lyap->observe(t, z, z_hat_next);
            v = lyap->trace().theta.back();
          } catch (const Error& e) {
            // A support coordinate underflowed; KL stays infinite afterwards.
            if (e.code() != ErrorCode::kDomainError) throw;
            theta_undefined = true;
            v = INFINITY;
          }
          break;
      }
      vals[m].push_back(v);
    }
  };

  try {
    auto res = run_streaming(problem, sc, observe, support_lost);
    cell.diverged_at = res.diverged_at;
    cell.warnings = std::move(res.warnings);
  } catch (const Error& e) {
    cell.error = cell.label() + ": " + e.message();
    cell.error_code = e.code();
  }
  const Axes axes = axes_for(cfg.preset);
  for (auto& [m, v] : vals) {
    // avg_gap starts at t = 1; theta holds Theta_{t+1} for t = 0..T.
    const std::size_t off = (m == Metric::kAvgGap || m == Metric::kTheta) ? 1 : 0;
    MetricSeries s{to_string(m), std::move(v), off};
    try {
      if (auto f = tail_fit(s, axes)) cell.fits[m] = *f;
    } catch (const Error&) {
    }
    cell.series[m] = std::move(s);
  }
  return cell;
}

inline std::string eta_tag(double eta) { return format_shortest(eta); }

}  // namespace detail

/// Text block summarizing an equilibrium, shared by reports and `certify`.
inline std::string equilibrium_text(const EquilibriumInfo& e) {
  std::ostringstream os;
  auto list = [&](const Vector& v) {
    os << "[";
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << format_double(v[i]);
    os << "]\n";
  };
  auto index_list = [&](const std::vector<std::size_t>& v) {
    os << "[";
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    os << "]\n";
  };
  os << "[equilibrium]\nrho: " << format_double(e.rho) << "\nunique: " << (e.unique ? "true" : "false")
     << "\nxi: " << (e.xi ? format_double(*e.xi) : std::string("undefined")) << "\nepsilon: "
     << format_double(e.epsilon) << "\nlog_epsilon: " << format_double(e.log_epsilon) << "\nsupp_x: ";
  index_list(e.supp_x);
  os << "supp_y: ";
  index_list(e.supp_y);
  os << "x_star: ";
  list(e.x_star);
  os << "y_star: ";
  list(e.y_star);
  return os.str();
}

namespace detail {

inline std::string report_text(const ExperimentReport& r) {
  std::ostringstream os;
  os << "# experiment report\n[config]\n" << serialize_config(r.config);
  if (r.equilibrium) os << equilibrium_text(*r.equilibrium);
  for (const auto& c : r.cells) {
    os << "[cell " << c.label() << "]\n";
    os << "diverged_at: " << (c.diverged_at ? std::to_string(*c.diverged_at) : std::string("none")) << "\n";
    if (c.error) os << "error: " << *c.error << "\n";
    for (const auto& w : c.warnings) os << "warning: " << w << "\n";
    for (const auto& [m, s] : c.series) {
      os << to_string(m) << ".final: " << (s.values.empty() ? std::string("none") : format_double(s.values.back()))
         << "\n";
      if (auto it = c.fits.find(m); it != c.fits.end()) {
        os << to_string(m) << ".fit: slope " << format_double(it->second.slope) << " r2 "
           << format_double(it->second.r_squared) << " window [" << it->second.window.begin + s.t_offset << ", "
           << it->second.window.end + s.t_offset << ")\n";
      }
    }
  }
  os << "[manifest]\n";
  for (const auto& f : r.manifest) os << f << "\n";
  return os.str();
}

}  // namespace detail

/// Runs every (algorithm, eta) cell concurrently and writes
/// <out>/<preset>/<algo>-eta<eta>-<metric>.csv, report.txt and optional <metric>.svg.
/// Cells that fail are reported and the first failure is rethrown after all
/// files are written.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentReport report;
  report.config = cfg;
  const Problem problem = build_problem(cfg);
  if (const auto* g = problem.matrix()) report.equilibrium = solve_matrix_game(*g);

  std::vector<std::future<CellResult>> futures;
  for (Algorithm a : algorithms_for(cfg.preset))
    for (double eta : cfg.eta_list)
      futures.push_back(std::async(std::launch::async, [&, a, eta] {
        return detail::run_cell(cfg, problem, report.equilibrium, a, eta);
      }));
  for (auto& f : futures) report.cells.push_back(f.get());

  const std::filesystem::path dir = std::filesystem::path(cfg.output_dir) / to_string(cfg.preset);
  for (const auto& c : report.cells) {
    for (const auto& [m, s] : c.series) {
      const std::string name = to_string(c.algorithm) + "-eta" + detail::eta_tag(c.eta) + "-" + to_string(m) + ".csv";
      emit_csv({s}, dir / name);
      report.manifest.push_back(name);
    }
  }
  if (cfg.emit_svg) {
    for (Metric m : cfg.metrics) {
      std::vector<MetricSeries> lines;
      for (const auto& c : report.cells) {
        auto it = c.series.find(m);
        if (it == c.series.end()) continue;
        MetricSeries s = it->second;
        std::size_t keep = 0;
        while (keep < s.values.size() && std::isfinite(s.values[keep]) && s.values[keep] > 0.0) ++keep;
        s.values.resize(keep);
        s.name = c.label();
        if (!s.values.empty()) lines.push_back(std::move(s));
      }
      const std::string name = to_string(m) + ".svg";
      emit_svg(lines, axes_for(cfg.preset), dir / name);
      report.manifest.push_back(name);
    }
  }
  report.manifest.push_back("report.txt");
  write_file_atomic(dir / "report.txt", detail::report_text(report));

  for (const auto& c : report.cells)
    if (c.error) raise(c.error_code, *c.error);
  return report;
}

}  // namespace ogda
