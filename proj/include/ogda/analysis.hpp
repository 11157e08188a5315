#pragma once

// Trajectory metrics, the Theta/zeta potential, one-step inequality checks,
// SP-MS estimation and the closed-form rate bounds.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ogda/equilibrium.hpp"
#include "ogda/error.hpp"
#include "ogda/geometry.hpp"
#include "ogda/numerics.hpp"
#include "ogda/point.hpp"
#include "ogda/problems.hpp"
#include "ogda/solvers.hpp"

namespace ogda {

/// values[k] is the metric at t = k + t_offset.
struct MetricSeries {
  std::string name;
  Vector values;
  std::size_t t_offset = 0;
};

/// max_j (G^T x)_j - min_i (G y)_i
inline double duality_gap_matrix(const DenseMatrix& g, const JointPoint& z) {
  if (z.x.size() != g.rows() || z.y.size() != g.cols()) {
    raise(ErrorCode::kDimensionMismatch, "point does not match the game");
  }
  const Vector gtx = g.apply_transposed(z.x);
  const Vector gy = g.apply(z.y);
  return *std::max_element(gtx.begin(), gtx.end()) - *std::min_element(gy.begin(), gy.end());
}

// ---------------------------------------------------------------------------
// Theta / zeta

/// theta[k] = Theta_{k+1} for k = 0..T, zeta[k] = zeta_{k+1} for k = 0..T-1.
struct LyapunovTrace {
  Vector theta;
  Vector zeta;

  /// max_t (Theta_{t+1} - Theta_t + (15/16) zeta_t); a valid run keeps this <= 0.
  double max_recursion_excess() const {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < zeta.size() && k + 1 < theta.size(); ++k)
      worst = std::max(worst, theta[k + 1] - theta[k] + (15.0 / 16.0) * zeta[k]);
    return worst;
  }
};

/// Builds the trace incrementally from the solver's (t, z_t, zhat_{t+1}) stream.
///   entropy:   Theta_t = KL(z*, zhat_t) + KL(zhat_t, z_{t-1}) / 16
///              zeta_t  = KL(zhat_{t+1}, z_t) + KL(z_t, zhat_t)
///   euclidean: the same with squared distances, z* replaced by proj_{Z*}(zhat_t)
class LyapunovAccumulator {
 public:
  /// Fixed reference point (any regularizer).
  LyapunovAccumulator(Regularizer reg, JointPoint z_star) : reg_(reg), z_star_(std::move(z_star)) {}
  /// Euclidean distances are taken to the equilibrium set; entropy uses its LP point.
  LyapunovAccumulator(Regularizer reg, const EquilibriumInfo& info)
      : reg_(reg), z_star_(info.z_star()), eq_(std::in_place, info) {}

  void observe(std::size_t t, const JointPoint& z_t, const JointPoint& z_hat_next) {
    const double to_star = reg_ == Regularizer::kEntropy ? kl_joint(z_star_, z_hat_next)
                           : eq_                        ? eq_->distance_sq(z_hat_next)
                                                        : dist_sq(z_star_, z_hat_next);
    const double tail = div(z_hat_next, z_t);
    trace_.theta.push_back(to_star + tail / 16.0);
    if (t > 0) trace_.zeta.push_back(tail + div(z_t, prev_hat_));
    prev_hat_ = z_hat_next;
  }

  const LyapunovTrace& trace() const { return trace_; }
  LyapunovTrace take() { return std::move(trace_); }

 private:
  double div(const JointPoint& a, const JointPoint& b) const {
    return reg_ == Regularizer::kEntropy ? kl_joint(a, b) : dist_sq(a, b);
  }

  Regularizer reg_;
  JointPoint z_star_;
  std::optional<EquilibriumSet> eq_;
  JointPoint prev_hat_;
  LyapunovTrace trace_;
};

namespace detail {

inline void require_secondary(const Trajectory& traj) {
  if (traj.z_hat.size() != traj.z.size() || traj.z.empty()) {
    raise(ErrorCode::kMissingSecondary, "trajectory was recorded without secondary iterates");
  }
}

}  // namespace detail

inline LyapunovTrace theta_zeta_trace(const Trajectory& traj, const JointPoint& z_star) {
  detail::require_secondary(traj);
  LyapunovAccumulator acc(traj.config.regularizer, z_star);
  for (std::size_t t = 0; t < traj.z.size(); ++t) acc.observe(t, traj.z[t], traj.z_hat[t]);
  return acc.take();
}

inline LyapunovTrace theta_zeta_trace(const Trajectory& traj, const EquilibriumInfo& info) {
  detail::require_secondary(traj);
  LyapunovAccumulator acc(traj.config.regularizer, info);
  for (std::size_t t = 0; t < traj.z.size(); ++t) acc.observe(t, traj.z[t], traj.z_hat[t]);
  return acc.take();
}

/// max over t of  eta F(z_t)^T (z_t - z) - [D(z, zhat_t) - D(z, zhat_{t+1}) - D(zhat_{t+1}, z_t)
///                 - (15/16) D(z_t, zhat_t) + (1/16) D(zhat_t, z_{t-1})].
inline double lemma1_check(const Trajectory& traj, const Problem& problem, const JointPoint& z_ref) {
  detail::require_secondary(traj);
  const Regularizer reg = traj.config.regularizer;
  const double eta = traj.config.eta;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 1; t < traj.z.size(); ++t) {
    const JointPoint& zt = traj.z[t];
    const JointPoint& zprev = traj.z[t - 1];
    const JointPoint& hat_t = traj.z_hat[t - 1];
    const JointPoint& hat_next = traj.z_hat[t];
    const JointPoint f = gradient_field(problem, zt);
    const double lhs = eta * (dot(f.x, zt.x) - dot(f.x, z_ref.x) + dot(f.y, zt.y) - dot(f.y, z_ref.y));
    const double rhs = bregman(reg, z_ref, hat_t) - bregman(reg, z_ref, hat_next) -
                       bregman(reg, hat_next, zt) - (15.0 / 16.0) * bregman(reg, zt, hat_t) +
                       (1.0 / 16.0) * bregman(reg, hat_t, zprev);
    worst = std::max(worst, lhs - rhs);
  }
  return worst;
}

/// Euclidean one-step lower bound at step t:
///   (32/81) eta^2 [F(zhat_{t+1})^T (zhat_{t+1} - z')]_+^2 / ||zhat_{t+1} - z'||^2 - zeta_t.
/// A valid OGDA step keeps this <= 0.
inline double gap_lower_bound_excess(const Problem& problem, double eta, const JointPoint& z_t, const JointPoint& hat_t,
                            const JointPoint& hat_next, const JointPoint& z_prime) {
  const double d2 = dist_sq(hat_next, z_prime);
  if (d2 == 0.0) return -std::numeric_limits<double>::infinity();
  const JointPoint f = gradient_field(problem, hat_next);
  const double inner = std::max(0.0, dot(f.x, hat_next.x) - dot(f.x, z_prime.x) + dot(f.y, hat_next.y) -
                                         dot(f.y, z_prime.y));
  const double zeta = dist_sq(hat_next, z_t) + dist_sq(z_t, hat_t);
  return (32.0 / 81.0) * eta * eta * inner * inner / d2 - zeta;
}

// ---------------------------------------------------------------------------
// SP-MS

struct SpmsSample {
  double ratio = 0.0;
  double distance = 0.0;
};

struct SpmsEstimate {
  std::vector<SpmsSample> points;
  double fitted_beta = 0.0;
  double fitted_C = 0.0;
  double r_squared = 0.0;
};

/// Lower estimate of sup_{z'} [F(z)^T (z - z')]_+ / ||z - z'|| over vertex,
/// random and projection probes.
inline SpmsSample spms_ratio(const Problem& problem, const JointPoint& z, const JointPoint& projection,
                             std::size_t probe_count, std::uint64_t seed) {
  const Vector zf = z.flatten();
  const Vector pf = projection.flatten();
  SpmsSample out;
  out.distance = std::sqrt(dist_sq(zf, pf));
  if (out.distance <= 1e-10) raise(ErrorCode::kAtEquilibrium, "point lies on the equilibrium set");

  const Vector f = gradient_field(problem, z).flatten();
  const double fz = dot(f, zf);
  double best = 0.0;
  auto consider = [&](const Vector& probe) {
    const double d = std::sqrt(dist_sq(zf, probe));
    if (d <= 1e-14) return;
    best = std::max(best, (fz - dot(f, probe)) / d);
  };
  const FeasibleSet joint = problem.joint_set();
  if (auto vs = vertices(joint, 1000)) {
    for (const auto& v : *vs) consider(v);
  }
  SplitMix64 rng(seed);
  for (std::size_t k = 0; k < probe_count; ++k) consider(sample_point(joint, rng));
  consider(pf);
  out.ratio = best;
  return out;
}

/// OLS of ln(ratio) on ln(distance): beta = slope - 1, C = exp(intercept).
inline SpmsEstimate fit_spms(const std::vector<SpmsSample>& points) {
  if (points.size() < 5) raise(ErrorCode::kTooFewPoints, "SP-MS fit needs at least 5 points");
  Vector xs, ys;
  for (const auto& p : points) {
    if (!(p.distance > 0.0) || !(p.ratio > 0.0)) {
      raise(ErrorCode::kNonPositiveValue, "SP-MS fit needs positive distances and ratios");
    }
    xs.push_back(std::log(p.distance));
    ys.push_back(std::log(p.ratio));
  }
  const RateFit fit = detail::ols(xs, ys, IndexRange{0, points.size()});
  return {points, fit.slope - 1.0, std::exp(fit.intercept), fit.r_squared};
}

/// Last-iterate bound on dist^2(z_t, Z*):
///   beta = 0: 64 d0 (1 + C5)^(-t)
///   beta > 0: 32 [(1 + 4 (4/beta)^(1/beta)) d0 + 2 (2/(C5 beta))^(1/beta)] t^(-1/beta)
inline double predicted_bound(double beta, double c5, double dist0_sq, double t) {
  if (!(beta >= 0.0)) raise(ErrorCode::kInvalidBeta, "beta must be nonnegative");
  if (beta == 0.0) return 64.0 * dist0_sq * std::pow(1.0 + c5, -t);
  const double inv = 1.0 / beta;
  return 32.0 * ((1.0 + 4.0 * std::pow(4.0 / beta, inv)) * dist0_sq + 2.0 * std::pow(2.0 / (c5 * beta), inv)) *
         std::pow(t, -inv);
}

/// Simulates B_{t+1} + q B_{t+1}^(p+1) = B_t and returns
/// max_t B_t / (c t^(-1/p)) with c = max{B_1, (2/(qp))^(1/p)}.
inline double recursion_bound_check(double b1, double p, double q, std::size_t horizon) {
  if (!(p > 0.0) || !(q > 0.0) || !(b1 >= 0.0)) {
    raise(ErrorCode::kDomainError, "recursion check needs p > 0, q > 0, B1 >= 0");
  }
  if (q * (1.0 + p) * std::pow(b1, p) > 1.0) {
    raise(ErrorCode::kPreconditionViolated, "q (1 + p) B1^p exceeds 1");
  }
  const double c = std::max(b1, std::pow(2.0 / (q * p), 1.0 / p));
  double b = b1;
  double worst = 0.0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    worst = std::max(worst, b / (c * std::pow(static_cast<double>(t), -1.0 / p)));
    if (b == 0.0) continue;
    // h(x) = x + q x^(p+1) - b is increasing on [0, b] with h(0) < 0 <= h(b).
    double lo = 0.0, hi = b;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid + q * std::pow(mid, p + 1.0) > b) hi = mid; else lo = mid;
    }
    b = 0.5 * (lo + hi);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Duality-gap averages

/// values[k] = (1/T') sum_{t=1..T'} gap(z_t) for T' = k + 1.
inline MetricSeries average_duality_gap(const DenseMatrix& g, const Trajectory& traj) {
  MetricSeries s{"avg_gap", {}, 1};
  double acc = 0.0;
  for (std::size_t t = 1; t < traj.z.size(); ++t) {
    acc += duality_gap_matrix(g, traj.z[t]);
    s.values.push_back(acc / static_cast<double>(t));
  }
  return s;
}

/// Partial sums S(T') = sum_{t<=T'} gap(z_t)^2 next to the telescoped OGDA bound
///   B(T') = (81 D^2 / (32 eta^2)) (32/15) (Theta_1 - Theta_{T'+1}).
struct GapEnergy {
  Vector partial_sums;
  Vector bound;

  double max_excess() const {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < partial_sums.size(); ++k) worst = std::max(worst, partial_sums[k] - bound[k]);
    return worst;
  }
};

inline GapEnergy gap_energy(const DenseMatrix& g, const Trajectory& traj, const LyapunovTrace& trace,
                            double diameter) {
  GapEnergy e;
  const double eta = traj.config.eta;
  const double scale = 81.0 * diameter * diameter / (32.0 * eta * eta) * (32.0 / 15.0);
  double acc = 0.0;
  for (std::size_t t = 1; t < traj.z.size() && t < trace.theta.size(); ++t) {
    const double a = duality_gap_matrix(g, traj.z[t]);
    acc += a * a;
    e.partial_sums.push_back(acc);
    e.bound.push_back(scale * (trace.theta[0] - trace.theta[t]));
  }
  return e;
}

}  // namespace ogda
