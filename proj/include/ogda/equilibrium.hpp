#pragma once

// Matrix-game equilibria by linear programming, uniqueness certificates,
// equilibrium polytopes and the problem-dependent constants xi, epsilon, c_x, c_y.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ogda/error.hpp"
#include "ogda/geometry.hpp"
#include "ogda/lp.hpp"
#include "ogda/numerics.hpp"
#include "ogda/point.hpp"

namespace ogda {

inline constexpr double kSupportThreshold = 1e-9;

struct EquilibriumInfo {
  double rho = 0.0;
  Vector x_star;
  Vector y_star;
  std::vector<std::size_t> supp_x;
  std::vector<std::size_t> supp_y;
  bool unique = false;
  /// Empty when the complement-support gap is not positive, which happens
  /// for games without a unique equilibrium.
  std::optional<double> xi;
  double epsilon = 0.0;
  /// ln(epsilon); epsilon itself underflows for moderately sized games.
  double log_epsilon = 0.0;
  std::optional<FeasibleSet> x_star_polytope;
  std::optional<FeasibleSet> y_star_polytope;
  std::optional<double> cx_estimate;
  std::optional<double> cy_estimate;

  JointPoint z_star() const { return {x_star, y_star}; }
};

namespace detail {

/// min_x max_j (G^T x)_j over the simplex. Returns (x, value).
inline std::pair<Vector, double> minimax_lp(const DenseMatrix& g) {
  const std::size_t m = g.rows(), n = g.cols();
  // Variables: x (m), r+ , r-.
  DenseMatrix a_ub(n, m + 2);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) a_ub(j, i) = g(i, j);
    a_ub(j, m) = -1.0;
    a_ub(j, m + 1) = 1.0;
  }
  DenseMatrix a_eq(1, m + 2);
  for (std::size_t i = 0; i < m; ++i) a_eq(0, i) = 1.0;
  Vector c(m + 2, 0.0);
  c[m] = 1.0;
  c[m + 1] = -1.0;
  const auto sol = simplex_lp(c, a_ub, Vector(n, 0.0), a_eq, Vector{1.0});
  if (sol.status != LpStatus::kOptimal) raise(ErrorCode::kLpFailure, "minimax LP did not reach an optimum");
  Vector x(sol.point.begin(), sol.point.begin() + static_cast<std::ptrdiff_t>(m));
  return {std::move(x), sol.objective};
}

inline void clean_distribution(Vector& v) {
  for (double& e : v) if (e <= kSupportThreshold) e = 0.0;
  double s = 0.0;
  for (double e : v) s += e;
  for (double& e : v) e /= s;
}

inline std::vector<std::size_t> support_of(const Vector& v) {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] > kSupportThreshold) s.push_back(i);
  return s;
}

/// max_j (G^T x)_j - min_i (G y)_i for a candidate pair.
inline double pair_gap(const DenseMatrix& g, const Vector& x, const Vector& y) {
  const Vector gtx = g.apply_transposed(x);
  const Vector gy = g.apply(y);
  return *std::max_element(gtx.begin(), gtx.end()) - *std::min_element(gy.begin(), gy.end());
}

/// Re-solves the indifference equations on the supports, which removes the
/// rounding left by the tableau. Kept only if it does not worsen the gap.
inline void polish(const DenseMatrix& g, Vector& x, Vector& y) {
  const auto sx = support_of(x), sy = support_of(y);
  if (sx.size() != sy.size() || sx.empty()) return;
  const std::size_t k = sx.size();
  // [G_S^T  -1; 1^T 0] [x_S; rho] = [0; 1]
  DenseMatrix ax(k + 1, k + 1), ay(k + 1, k + 1);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      ax(r, c) = g(sx[c], sy[r]);
      ay(r, c) = g(sx[r], sy[c]);
    }
    ax(r, k) = -1.0;
    ay(r, k) = -1.0;
    ax(k, r) = 1.0;
    ay(k, r) = 1.0;
  }
  Vector rhs(k + 1, 0.0);
  rhs[k] = 1.0;
  auto px = solve_linear(ax, rhs);
  auto py = solve_linear(ay, rhs);
  if (!px || !py) return;
  Vector nx(x.size(), 0.0), ny(y.size(), 0.0);
  for (std::size_t r = 0; r < k; ++r) {
    if (!((*px)[r] > 0.0) || !((*py)[r] > 0.0)) return;
    nx[sx[r]] = (*px)[r];
    ny[sy[r]] = (*py)[r];
  }
  if (pair_gap(g, nx, ny) <= pair_gap(g, x, y)) {
    x = std::move(nx);
    y = std::move(ny);
  }
}

/// Range of coordinate i over {v in simplex : sign * (A v) <= sign * rho + slack}.
inline bool coordinate_ranges_collapse(const DenseMatrix& a, double rho, double slack) {
  const std::size_t n = a.cols(), m = a.rows();
  DenseMatrix a_eq(1, n, 1.0);
  const Vector b_ub(m, rho + slack);
  for (std::size_t i = 0; i < n; ++i) {
    Vector c(n, 0.0);
    c[i] = 1.0;
    const auto lo = simplex_lp(c, a, b_ub, a_eq, Vector{1.0});
    c[i] = -1.0;
    const auto hi = simplex_lp(c, a, b_ub, a_eq, Vector{1.0});
    if (lo.status != LpStatus::kOptimal || hi.status != LpStatus::kOptimal) {
      raise(ErrorCode::kLpFailure, "uniqueness LP did not reach an optimum");
    }
    if (hi.point[i] - lo.point[i] > 1e-7) return false;
  }
  return true;
}

}  // namespace detail

inline constexpr double kUniquenessSlack = 1e-12;

/// True iff both X* and Y* are singletons, certified coordinate by coordinate.
/// The optimality rows are relaxed by kUniquenessSlack; an isolated
/// equilibrium then moves by slack / sigma_min of its support block, far
/// below the 1e-7 gap threshold.
inline bool is_unique(const DenseMatrix& g, double rho) {
  // X* = {x : G^T x <= rho}, Y* = {y : -G y <= -rho}.
  if (!detail::coordinate_ranges_collapse(g.transposed(), rho, kUniquenessSlack)) return false;
  return detail::coordinate_ranges_collapse(g.scaled(-1.0), -rho, kUniquenessSlack);
}

inline double xi_constant(const DenseMatrix& g, const EquilibriumInfo& info) {
  const Vector gy = g.apply(info.y_star);
  const Vector gtx = g.apply_transposed(info.x_star);
  constexpr double inf = std::numeric_limits<double>::infinity();
  double a = inf, b = inf;
  bool any = false;
  for (std::size_t i = 0; i < gy.size(); ++i) {
    if (std::find(info.supp_x.begin(), info.supp_x.end(), i) != info.supp_x.end()) continue;
    a = std::min(a, gy[i] - info.rho);
    any = true;
  }
  for (std::size_t j = 0; j < gtx.size(); ++j) {
    if (std::find(info.supp_y.begin(), info.supp_y.end(), j) != info.supp_y.end()) continue;
    b = std::min(b, info.rho - gtx[j]);
    any = true;
  }
  if (!any) return 1.0;
  const double xi = std::min(a, b);
  if (xi <= 1e-12) raise(ErrorCode::kNonPositiveXi, "complement-support gap is not positive");
  return std::min(xi, 1.0);
}

inline double log_epsilon_constant(const JointPoint& z_star, std::size_t m, std::size_t n) {
  const double lmn = std::log(static_cast<double>(m) * static_cast<double>(n));
  double best = 0.0;
  for (const auto* block : {&z_star.x, &z_star.y})
    for (double v : *block)
      if (v > kSupportThreshold) best = std::min(best, -lmn / v);
  return best;
}

/// epsilon = min over the support of exp(-ln(MN) / z*_j).
inline double epsilon_constant(const JointPoint& z_star, std::size_t m, std::size_t n) {
  return std::exp(log_epsilon_constant(z_star, m, n));
}

namespace detail {

inline double cx_value(const DenseMatrix& g, const Vector& x_star, const std::vector<std::size_t>& supp_y,
                       const Vector& x) {
  const double l1 = norm1_diff(x, x_star);
  if (l1 <= 1e-12) return std::numeric_limits<double>::quiet_NaN();
  Vector d(x.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = x[i] - x_star[i];
  const Vector gtd = g.apply_transposed(d);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j : supp_y) best = std::max(best, gtd[j]);
  return best / l1;
}

}  // namespace detail

/// Evaluates the c_x objective on the given points and returns its minimum.
inline double cx_over_points(const DenseMatrix& g, const EquilibriumInfo& info, const std::vector<Vector>& xs) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : xs) {
    const double v = detail::cx_value(g, info.x_star, info.supp_y, x);
    if (!std::isnan(v)) best = std::min(best, v);
  }
  if (!std::isfinite(best)) raise(ErrorCode::kDegenerateSample, "every sample coincides with the equilibrium");
  return best;
}

/// Sampled upper estimates of (c_x, c_y): simplex vertices plus `samples`
/// uniform points per side.
inline std::pair<double, double> estimate_cx_cy(const DenseMatrix& g, const EquilibriumInfo& info,
                                                std::size_t samples, std::uint64_t seed) {
  SplitMix64 rng(seed);
  auto cloud = [&](std::size_t dim) {
    auto set = FeasibleSet::simplex(dim);
    std::vector<Vector> pts = *vertices(set);
    for (std::size_t k = 0; k < samples; ++k) pts.push_back(sample_point(set, rng));
    return pts;
  };
  const double cx = cx_over_points(g, info, cloud(g.rows()));
  // c_y is c_x of the transposed, negated game: x^T G (y* - y) = (y - y*)^T (-G^T) x.
  EquilibriumInfo swapped;
  swapped.x_star = info.y_star;
  swapped.supp_y = info.supp_x;
  const double cy = cx_over_points(g.transposed().scaled(-1.0), swapped, cloud(g.cols()));
  return {cx, cy};
}

struct DerivedConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  double c5 = 0.0;
};

inline DerivedConstants derived_constants(double xi, double epsilon, double c, double eta) {
  DerivedConstants d;
  d.c1 = std::pow(epsilon, 4) * c * c / 64.0;
  d.c2 = std::pow(epsilon, 3) * c * c * xi * xi / 128.0;
  d.c5 = std::min(16.0 * eta * eta * c * c / 81.0, 0.5);
  return d;
}

inline EquilibriumInfo solve_matrix_game(const DenseMatrix& g) {
  if (g.rows() == 0 || g.cols() == 0) raise(ErrorCode::kDimensionMismatch, "empty payoff matrix");
  auto [x, vx] = detail::minimax_lp(g);
  // Maximin side: min_y max_i (-G y)_i has value -rho.
  auto [y, vy] = detail::minimax_lp(g.transposed().scaled(-1.0));
  vy = -vy;
  if (std::abs(vx - vy) > 1e-8) {
    raise(ErrorCode::kLpFailure, "primal and dual game values disagree");
  }
  detail::clean_distribution(x);
  detail::clean_distribution(y);
  detail::polish(g, x, y);

  EquilibriumInfo info;
  const Vector gtx = g.apply_transposed(x);
  const Vector gy = g.apply(y);
  info.rho = 0.5 * (*std::max_element(gtx.begin(), gtx.end()) + *std::min_element(gy.begin(), gy.end()));
  info.x_star = std::move(x);
  info.y_star = std::move(y);
  info.supp_x = detail::support_of(info.x_star);
  info.supp_y = detail::support_of(info.y_star);
  info.unique = is_unique(g, info.rho);
  try {
    info.xi = xi_constant(g, info);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNonPositiveXi) throw;
  }
  const std::size_t m = g.rows(), n = g.cols();
  info.log_epsilon = log_epsilon_constant(info.z_star(), m, n);
  info.epsilon = std::exp(info.log_epsilon);

  // X* = {x in simplex : G^T x <= rho}
  {
    DenseMatrix a(n + m + 1, m);
    Vector b(n + m + 1, 0.0);
    std::vector<bool> eq(n + m + 1, false);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < m; ++i) a(j, i) = g(i, j);
      b[j] = info.rho;
    }
    for (std::size_t i = 0; i < m; ++i) a(n + i, i) = -1.0;
    for (std::size_t i = 0; i < m; ++i) a(n + m, i) = 1.0;
    b[n + m] = 1.0;
    eq[n + m] = true;
    info.x_star_polytope = FeasibleSet::polytope(a, b, eq);
  }
  // Y* = {y in simplex : G y >= rho}
  {
    DenseMatrix a(m + n + 1, n);
    Vector b(m + n + 1, 0.0);
    std::vector<bool> eq(m + n + 1, false);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) a(i, j) = -g(i, j);
      b[i] = -info.rho;
    }
    for (std::size_t j = 0; j < n; ++j) a(m + j, j) = -1.0;
    for (std::size_t j = 0; j < n; ++j) a(m + n, j) = 1.0;
    b[m + n] = 1.0;
    eq[m + n] = true;
    info.y_star_polytope = FeasibleSet::polytope(a, b, eq);
  }
  return info;
}

/// Projection onto Z* = X* x Y*, reusing active sets between calls.
class EquilibriumSet {
 public:
  explicit EquilibriumSet(const EquilibriumInfo& info) : info_(&info) {}

  JointPoint project(const JointPoint& z) {
    if (info_->unique || !info_->x_star_polytope || !info_->y_star_polytope) return info_->z_star();
    return {ogda::project(*info_->x_star_polytope, z.x, &hx_),
            ogda::project(*info_->y_star_polytope, z.y, &hy_)};
  }

  double distance_sq(const JointPoint& z) {
    if (info_->unique) return dist_sq(z.x, info_->x_star) + dist_sq(z.y, info_->y_star);
    return dist_sq(z, project(z));
  }

 private:
  const EquilibriumInfo* info_;
  ProjectionHint hx_;
  ProjectionHint hy_;
};

/// ||z - proj_{Z*}(z)||^2.
inline double distance_to_equilibria(const DenseMatrix& g, const EquilibriumInfo& info, const JointPoint& z) {
  if (z.x.size() != g.rows() || z.y.size() != g.cols()) {
    raise(ErrorCode::kDimensionMismatch, "point does not match the game");
  }
  EquilibriumSet set(info);
  return set.distance_sq(z);
}

}  // namespace ogda
