#pragma once

// Benchmark saddle-point problems: objective, gradient field F = (grad_x f, -grad_y f),
// smoothness constants and feasible sets.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "ogda/error.hpp"
#include "ogda/geometry.hpp"
#include "ogda/numerics.hpp"
#include "ogda/point.hpp"

namespace ogda {

struct MatrixGame {
  DenseMatrix g;
};

struct BilinearPolytope {
  DenseMatrix g;
};

/// f(x, y) = x2 y1 - x1 y2 on CurvedRegion(n) x CurvedRegion(n).
struct CurvedBilinear {
  int n = 2;
};

/// f(x, y) = x1^2 - y1^2 + 2 x1 y1 on the 2-simplex.
struct StronglyConvexToy {};

/// f(x, y) = x1^(2n) - x1 y1 - y1^(2n) on the 2-simplex.
struct PowerToy {
  int n = 2;
};

using ProblemKind = std::variant<MatrixGame, BilinearPolytope, CurvedBilinear, StronglyConvexToy, PowerToy>;

struct Problem {
  ProblemKind kind;
  FeasibleSet x_set;
  FeasibleSet y_set;
  std::optional<JointPoint> known_equilibrium;

  /// Payoff matrix for the bilinear kinds, nullptr otherwise.
  const DenseMatrix* matrix() const noexcept {
    if (const auto* m = std::get_if<MatrixGame>(&kind)) return &m->g;
    if (const auto* b = std::get_if<BilinearPolytope>(&kind)) return &b->g;
    return nullptr;
  }
  bool is_matrix_game() const noexcept { return std::holds_alternative<MatrixGame>(kind); }
  FeasibleSet joint_set() const { return FeasibleSet::product({x_set, y_set}); }
};

enum class NormPair { kL2, kL1Linf };

namespace detail {

inline void check_point_dims(const Problem& p, const JointPoint& z) {
  if (z.x.size() != p.x_set.dim() || z.y.size() != p.y_set.dim()) {
    raise(ErrorCode::kDimensionMismatch, "point blocks do not match the problem's sets");
  }
}

}  // namespace detail

/// f(z) without the feasibility check; used by finite differences.
inline double evaluate_objective(const Problem& p, const JointPoint& z) {
  detail::check_point_dims(p, z);
  const auto& x = z.x;
  const auto& y = z.y;
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, MatrixGame> || std::is_same_v<T, BilinearPolytope>) {
          return dot(x, k.g.apply(y));
        } else if constexpr (std::is_same_v<T, CurvedBilinear>) {
          return x[1] * y[0] - x[0] * y[1];
        } else if constexpr (std::is_same_v<T, StronglyConvexToy>) {
          return x[0] * x[0] - y[0] * y[0] + 2.0 * x[0] * y[0];
        } else {
          const int e = 2 * k.n;
          return std::pow(x[0], e) - x[0] * y[0] - std::pow(y[0], e);
        }
      },
      p.kind);
}

inline double objective(const Problem& p, const JointPoint& z) {
  detail::check_point_dims(p, z);
  if (!contains(p.x_set, z.x, 1e-8) || !contains(p.y_set, z.y, 1e-8)) {
    raise(ErrorCode::kInfeasiblePoint, "objective evaluated outside the feasible set");
  }
  return evaluate_objective(p, z);
}

inline JointPoint gradient_field(const Problem& p, const JointPoint& z) {
  detail::check_point_dims(p, z);
  const auto& x = z.x;
  const auto& y = z.y;
  return std::visit(
      [&](const auto& k) -> JointPoint {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, MatrixGame> || std::is_same_v<T, BilinearPolytope>) {
          Vector gx = k.g.apply(y);
          Vector gy = k.g.apply_transposed(x);
          for (double& v : gy) v = -v;
          return {std::move(gx), std::move(gy)};
        } else if constexpr (std::is_same_v<T, CurvedBilinear>) {
          return {{-y[1], y[0]}, {-x[1], x[0]}};
        } else if constexpr (std::is_same_v<T, StronglyConvexToy>) {
          return {{2.0 * x[0] + 2.0 * y[0], 0.0}, {2.0 * y[0] - 2.0 * x[0], 0.0}};
        } else {
          const double c = 2.0 * k.n;
          const int e = 2 * k.n - 1;
          return {{c * std::pow(x[0], e) - y[0], 0.0}, {c * std::pow(y[0], e) + x[0], 0.0}};
        }
      },
      p.kind);
}

inline double smoothness(const Problem& p, NormPair norms) {
  if (norms == NormPair::kL1Linf) {
    const auto* m = std::get_if<MatrixGame>(&p.kind);
    if (!m || m->g.max_abs() > 1.0) {
      raise(ErrorCode::kUnsupportedNormPair, "l1-linf smoothness needs a matrix game with entries in [-1, 1]");
    }
    return 1.0;
  }
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, MatrixGame> || std::is_same_v<T, BilinearPolytope>) {
          return operator_norm(k.g, 1e-12);
        } else if constexpr (std::is_same_v<T, CurvedBilinear>) {
          return 1.0;  // F is a signed permutation of z
        } else if constexpr (std::is_same_v<T, StronglyConvexToy>) {
          // Constant Jacobian of F over (x1, x2, y1, y2).
          const DenseMatrix jac{{2, 0, 2, 0}, {0, 0, 0, 0}, {-2, 0, 2, 0}, {0, 0, 0, 0}};
          return operator_norm(jac, 1e-14);
        } else {
          const double e = 2.0 * k.n;
          return e * (e - 1.0) + 1.0;
        }
      },
      p.kind);
}

// ---------------------------------------------------------------------------
// Catalog

inline Problem matrix_game(DenseMatrix g) {
  if (g.rows() == 0 || g.cols() == 0) raise(ErrorCode::kDimensionMismatch, "empty payoff matrix");
  auto xs = FeasibleSet::simplex(g.rows());
  auto ys = FeasibleSet::simplex(g.cols());
  return {MatrixGame{std::move(g)}, std::move(xs), std::move(ys), std::nullopt};
}

inline Problem bilinear_polytope(DenseMatrix g, FeasibleSet x_set, FeasibleSet y_set) {
  if (g.rows() != x_set.dim() || g.cols() != y_set.dim()) {
    raise(ErrorCode::kDimensionMismatch, "payoff matrix does not match the polytopes");
  }
  return {BilinearPolytope{std::move(g)}, std::move(x_set), std::move(y_set), std::nullopt};
}

/// Entries drawn row-major from the uniform [-1, 1) stream, then scaled to
/// unit operator norm.
inline Problem random_matrix_game(std::size_t m, std::size_t n, std::uint64_t seed) {
  if (m == 0 || n == 0) raise(ErrorCode::kDimensionMismatch, "game dimensions must be positive");
  DenseMatrix g(m, n);
  RngState s{seed};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      auto [v, next] = uniform_pm1(s);
      g(i, j) = v;
      s = next;
    }
  }
  const double sigma = operator_norm(g, 1e-12);
  return matrix_game(g.scaled(1.0 / sigma));
}

/// 5x5 game with value 0, X* = {(1/3,1/3,1/3,0,0)} and a two-dimensional
/// family of maximin strategies.
inline Problem multi_ne_game() {
  return matrix_game(DenseMatrix{{0, -1, 1, 0, 0},
                                 {1, 0, -1, 0, 0},
                                 {-1, 1, 0, 0, 0},
                                 {-1, 1, 0, 2, -1},
                                 {-1, 1, 0, -1, 2}});
}

inline Problem rock_paper_scissors() {
  return matrix_game(DenseMatrix{{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}});
}

inline Problem matching_pennies() { return matrix_game(DenseMatrix{{1, -1}, {-1, 1}}); }

inline Problem curved_bilinear(int n) {
  auto set = FeasibleSet::curved(n);
  return {CurvedBilinear{n}, set, set, JointPoint{{0.0, 0.0}, {0.0, 0.0}}};
}

inline Problem strongly_convex_toy() {
  auto set = FeasibleSet::simplex(2);
  return {StronglyConvexToy{}, set, set, JointPoint{{0.0, 1.0}, {0.0, 1.0}}};
}

inline Problem power_toy(int n) {
  if (n < 2) raise(ErrorCode::kDomainError, "power toy needs n >= 2");
  auto set = FeasibleSet::simplex(2);
  return {PowerToy{n}, set, set, JointPoint{{0.0, 1.0}, {0.0, 1.0}}};
}

}  // namespace ogda
