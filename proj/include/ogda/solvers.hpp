#pragma once

// Optimistic mirror descent: OGDA (Euclidean) and OMWU (entropy).
//
//   z_t       = argmin_z { eta <z, F(z_{t-1})> + D(z, zhat_t) }
//   zhat_{t+1} = argmin_z { eta <z, F(z_t)>     + D(z, zhat_t) }
//
// with zhat_1 = z_0.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ogda/error.hpp"
#include "ogda/geometry.hpp"
#include "ogda/numerics.hpp"
#include "ogda/point.hpp"
#include "ogda/problems.hpp"

namespace ogda {

struct SolverConfig {
  Regularizer regularizer = Regularizer::kEuclidean;
  double eta = 0.125;
  std::size_t steps = 1000;
  JointPoint initial;
  bool record_secondary = true;
};

/// z[t] for t = 0..T and z_hat[k] = zhat_{k+1} for k = 0..T (so zhat_1..zhat_{T+1}).
/// After a divergence both stop at the last finite step.
struct Trajectory {
  std::vector<JointPoint> z;
  std::vector<JointPoint> z_hat;
  SolverConfig config;
  std::optional<std::size_t> diverged_at;
  std::vector<std::string> warnings;

  const JointPoint& hat(std::size_t t) const { return z_hat.at(t - 1); }
  std::size_t last_step() const { return z.empty() ? 0 : z.size() - 1; }
};

namespace detail {

inline Vector mirror_block(Regularizer reg, const FeasibleSet& set, const Vector& center,
                           const Vector& grad, double eta) {
  if (reg == Regularizer::kEuclidean) {
    Vector p(center.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = center[i] - eta * grad[i];
    return project(set, p);
  }
  // x_i proportional to center_i exp(-eta g_i), shifted by the max log-weight.
  const std::size_t n = center.size();
  Vector logw(n);
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double step = eta * grad[i];
    if (!(std::abs(step) <= 700.0)) {
      raise(ErrorCode::kNumericalOverflow, "multiplicative update exponent exceeds 700");
    }
    logw[i] = center[i] > 0.0 ? std::log(center[i]) - step : -std::numeric_limits<double>::infinity();
    mx = std::max(mx, logw[i]);
  }
  Vector out(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += (out[i] = std::exp(logw[i] - mx));
  for (double& v : out) v /= s;
  return out;
}

inline JointPoint mirror_step(const Problem& p, Regularizer reg, double eta, const JointPoint& center,
                              const JointPoint& grad) {
  return {mirror_block(reg, p.x_set, center.x, grad.x, eta),
          mirror_block(reg, p.y_set, center.y, grad.y, eta)};
}

inline bool healthy(Regularizer reg, const JointPoint& z) {
  if (!all_finite(z.x) || !all_finite(z.y)) return false;
  if (reg == Regularizer::kEntropy) {
    for (double v : z.x) if (!(v >= 0.0)) return false;
    for (double v : z.y) if (!(v >= 0.0)) return false;
  }
  return true;
}

inline bool has_zero(const JointPoint& z) {
  for (double v : z.x) if (v == 0.0) return true;
  for (double v : z.y) if (v == 0.0) return true;
  return false;
}

}  // namespace detail

/// One optimistic step from (z_{t-1}, zhat_t) to (z_t, zhat_{t+1}).
inline std::pair<JointPoint, JointPoint> omd_step(const Problem& problem, const SolverConfig& config,
                                                  const JointPoint& z_prev, const JointPoint& z_hat) {
  const JointPoint z_t =
      detail::mirror_step(problem, config.regularizer, config.eta, z_hat, gradient_field(problem, z_prev));
  JointPoint z_next =
      detail::mirror_step(problem, config.regularizer, config.eta, z_hat, gradient_field(problem, z_t));
  return {z_t, std::move(z_next)};
}

/// Threshold above which the one-step guarantees no longer apply.
inline std::optional<double> step_size_threshold(const Problem& problem, Regularizer reg) {
  if (reg == Regularizer::kEntropy) {
    if (problem.is_matrix_game() && problem.matrix()->max_abs() <= 1.0) return 0.125;
    return std::nullopt;
  }
  return 1.0 / (8.0 * smoothness(problem, NormPair::kL2));
}

inline void validate_config(const Problem& problem, const SolverConfig& config) {
  if (!(config.eta > 0.0) || !std::isfinite(config.eta)) {
    raise(ErrorCode::kConfigMismatch, "step size must be positive and finite");
  }
  if (config.steps == 0) raise(ErrorCode::kConfigMismatch, "steps must be positive");
  if (config.regularizer == Regularizer::kEntropy &&
      !(problem.x_set.simplex_like() && problem.y_set.simplex_like())) {
    raise(ErrorCode::kConfigMismatch, "entropy regularizer requires simplex feasible sets");
  }
  const auto& z0 = config.initial;
  if (z0.x.size() != problem.x_set.dim() || z0.y.size() != problem.y_set.dim()) {
    raise(ErrorCode::kConfigMismatch, "initial point has the wrong dimensions");
  }
  if (!contains(problem.x_set, z0.x, 1e-9) || !contains(problem.y_set, z0.y, 1e-9)) {
    raise(ErrorCode::kConfigMismatch, "initial point is not feasible");
  }
  if (config.regularizer == Regularizer::kEntropy && (!detail::healthy(Regularizer::kEntropy, z0) || detail::has_zero(z0))) {
    raise(ErrorCode::kConfigMismatch, "entropy initial point must be strictly positive");
  }
}

struct StreamResult {
  std::size_t steps_completed = 0;
  std::optional<std::size_t> diverged_at;
  std::vector<std::string> warnings;
  JointPoint last_z;
  JointPoint last_z_hat;
};

/// Runs the solver without storing the trajectory. `observe(t, z_t, zhat_{t+1})`
/// is called for t = 0..T; at t = 0 the pair is (z_0, zhat_1) = (z_0, z_0).
/// An optional `diverged(z_t)` predicate adds a caller-specific stop rule.
inline StreamResult run_streaming(
    const Problem& problem, const SolverConfig& config,
    const std::function<void(std::size_t, const JointPoint&, const JointPoint&)>& observe,
    const std::function<bool(const JointPoint&)>& diverged = {}) {
  validate_config(problem, config);
  StreamResult res;
  if (auto thr = step_size_threshold(problem, config.regularizer); thr && config.eta > *thr * (1 + 1e-12)) {
    std::ostringstream os;
    os << "eta = " << config.eta << " exceeds the stability threshold " << *thr;
    res.warnings.push_back(os.str());
  }

  JointPoint z = config.initial;
  JointPoint z_hat = config.initial;
  bool underflow_reported = false;
  observe(0, z, z_hat);
  for (std::size_t t = 1; t <= config.steps; ++t) {
    std::pair<JointPoint, JointPoint> next;
    try {
      next = omd_step(problem, config, z, z_hat);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNumericalOverflow) throw;
      res.diverged_at = t;
      break;
    }
    if (!detail::healthy(config.regularizer, next.first) || !detail::healthy(config.regularizer, next.second) ||
        (diverged && diverged(next.first))) {
      res.diverged_at = t;
      break;
    }
    if (config.regularizer == Regularizer::kEntropy && !underflow_reported &&
        (detail::has_zero(next.first) || detail::has_zero(next.second))) {
      // The multiplicative update keeps a zero coordinate at zero from here on.
      res.warnings.push_back("a coordinate underflowed to 0 at t = " + std::to_string(t));
      underflow_reported = true;
    }
    z = std::move(next.first);
    z_hat = std::move(next.second);
    res.steps_completed = t;
    observe(t, z, z_hat);
  }
  res.last_z = std::move(z);
  res.last_z_hat = std::move(z_hat);
  return res;
}

inline Trajectory run(const Problem& problem, const SolverConfig& config) {
  Trajectory traj;
  traj.config = config;
  traj.z.reserve(config.steps + 1);
  if (config.record_secondary) traj.z_hat.reserve(config.steps + 1);
  auto res = run_streaming(problem, config, [&](std::size_t, const JointPoint& z, const JointPoint& zh) {
    traj.z.push_back(z);
    if (config.record_secondary) traj.z_hat.push_back(zh);
  });
  traj.diverged_at = res.diverged_at;
  traj.warnings = std::move(res.warnings);
  return traj;
}

}  // namespace ogda
