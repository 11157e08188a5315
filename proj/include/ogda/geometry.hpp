#pragma once

// Feasible sets, Euclidean projections and Bregman divergences.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ogda/error.hpp"
#include "ogda/lp.hpp"
#include "ogda/numerics.hpp"
#include "ogda/point.hpp"

namespace ogda {

class FeasibleSet;

struct Simplex {
  std::size_t dim = 1;
};

struct Box {
  Vector lo;
  Vector hi;
};

/// {v : A_in v <= b_in, A_eq v = b_eq}. Equality rows are reduced to a
/// linearly independent subset on construction.
struct HalfspacePolytope {
  std::size_t dim = 0;
  DenseMatrix a_in;
  Vector b_in;
  DenseMatrix a_eq;
  Vector b_eq;
  bool empty = false;
};

/// {(a, b) : 0 <= a <= 1/2, 0 <= b <= 1/2^n, a^n <= b}
struct CurvedRegion {
  int n = 2;
  double b_max() const { return std::ldexp(1.0, -n); }
};

struct Product {
  std::vector<FeasibleSet> factors;
};

class FeasibleSet {
 public:
  using Kind = std::variant<Simplex, Box, HalfspacePolytope, CurvedRegion, Product>;

  static FeasibleSet simplex(std::size_t dim) {
    if (dim == 0) raise(ErrorCode::kDimensionMismatch, "simplex dimension must be positive");
    return FeasibleSet(Simplex{dim}, dim);
  }

  static FeasibleSet box(Vector lo, Vector hi) {
    if (lo.size() != hi.size() || lo.empty()) {
      raise(ErrorCode::kDimensionMismatch, "box bounds must have equal positive length");
    }
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (!(lo[i] <= hi[i])) raise(ErrorCode::kInfeasibleSet, "box has lo > hi");
    }
    const std::size_t d = lo.size();
    return FeasibleSet(Box{std::move(lo), std::move(hi)}, d);
  }

  static FeasibleSet curved(int n) {
    if (n < 2) raise(ErrorCode::kDomainError, "curved region needs n >= 2");
    return FeasibleSet(CurvedRegion{n}, 2);
  }

  static FeasibleSet product(std::vector<FeasibleSet> factors) {
    std::size_t d = 0;
    for (const auto& f : factors) d += f.dim();
    return FeasibleSet(Product{std::move(factors)}, d);
  }

  /// Rows with eq_mask[i] set are equalities; the rest are A_i v <= b_i.
  static FeasibleSet polytope(const DenseMatrix& a, const Vector& b, const std::vector<bool>& eq_mask);

  std::size_t dim() const noexcept { return dim_; }
  const Kind& kind() const noexcept { return kind_; }
  template <class T>
  const T* as() const noexcept {
    return std::get_if<T>(&kind_);
  }

  /// True for a simplex or a product whose factors are all simplices.
  bool simplex_like() const {
    if (as<Simplex>()) return true;
    if (const auto* p = as<Product>()) {
      return std::all_of(p->factors.begin(), p->factors.end(),
                         [](const FeasibleSet& f) { return f.simplex_like(); });
    }
    return false;
  }

 private:
  FeasibleSet(Kind k, std::size_t d) : kind_(std::move(k)), dim_(d) {}

  Kind kind_;
  std::size_t dim_;
};

inline FeasibleSet FeasibleSet::polytope(const DenseMatrix& a, const Vector& b,
                                         const std::vector<bool>& eq_mask) {
  if (a.rows() != b.size() || eq_mask.size() != b.size()) {
    raise(ErrorCode::kDimensionMismatch, "polytope rows, rhs and mask disagree");
  }
  const std::size_t d = a.cols();
  if (d == 0) raise(ErrorCode::kDimensionMismatch, "polytope needs a positive dimension");

  HalfspacePolytope p;
  p.dim = d;
  Vector in_rows, eq_rows;
  std::vector<Vector> basis;  // orthonormalized accepted equality rows
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    if (!eq_mask[i]) {
      in_rows.insert(in_rows.end(), r.begin(), r.end());
      p.b_in.push_back(b[i]);
      continue;
    }
    Vector w(r.begin(), r.end());
    const double n0 = norm2(w);
    for (const auto& q : basis) {
      const double c = dot(w, q);
      for (std::size_t j = 0; j < d; ++j) w[j] -= c * q[j];
    }
    const double nw = norm2(w);
    if (n0 == 0.0 || nw <= 1e-10 * n0) continue;  // dependent row
    for (double& v : w) v /= nw;
    basis.push_back(std::move(w));
    eq_rows.insert(eq_rows.end(), r.begin(), r.end());
    p.b_eq.push_back(b[i]);
  }
  if (!p.b_in.empty()) p.a_in = DenseMatrix(p.b_in.size(), d, std::move(in_rows));
  if (!p.b_eq.empty()) p.a_eq = DenseMatrix(p.b_eq.size(), d, std::move(eq_rows));

  // Feasibility LP over v = v+ - v-.
  auto split = [d](const DenseMatrix& m) {
    if (m.empty()) return DenseMatrix{};
    DenseMatrix s(m.rows(), 2 * d);
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < d; ++j) s(i, j) = m(i, j), s(i, d + j) = -m(i, j);
    return s;
  };
  const auto sol = simplex_lp(Vector(2 * d, 0.0), split(p.a_in), p.b_in, split(p.a_eq), p.b_eq);
  p.empty = sol.status == LpStatus::kInfeasible;
  return FeasibleSet(std::move(p), d);
}

// ---------------------------------------------------------------------------
// Projection

namespace detail {

inline void check_dim(const FeasibleSet& s, std::size_t got) {
  if (s.dim() != got) {
    raise(ErrorCode::kDimensionMismatch,
          "point has dimension " + std::to_string(got) + ", set has " + std::to_string(s.dim()));
  }
}

/// Sort-and-threshold projection onto the probability simplex.
inline Vector project_simplex(std::span<const double> p) {
  Vector u(p.begin(), p.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  Vector out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = std::max(p[i] - theta, 0.0);
  return out;
}

inline Vector project_curved(const CurvedRegion& c, std::span<const double> p) {
  const double bmax = c.b_max();
  const double a = std::clamp(p[0], 0.0, 0.5);
  const double b = std::clamp(p[1], 0.0, bmax);
  if (std::pow(a, c.n) <= b) return {a, b};

  // Nearest point lies on b = u^n. g(u) = (p-u)^2 + (q-u^n)^2 is strictly
  // convex on [0, 1/2] whenever the clamped point is outside the region.
  const double n = c.n;
  auto dg = [&](double u) {
    const double un1 = std::pow(u, c.n - 1);
    return -2.0 * (p[0] - u) - 2.0 * n * un1 * (p[1] - un1 * u);
  };
  double lo = 0.0, hi = 0.5;
  double u;
  if (dg(lo) >= 0.0) {
    u = lo;
  } else if (dg(hi) <= 0.0) {
    u = hi;
  } else {
    while (hi - lo > 1e-14) {
      const double mid = 0.5 * (lo + hi);
      if (dg(mid) > 0.0) hi = mid; else lo = mid;
    }
    u = 0.5 * (lo + hi);
  }
  return {u, std::clamp(std::pow(u, c.n), 0.0, bmax)};
}

}  // namespace detail

/// Active set remembered between calls; projections of nearby points usually
/// share it, which makes the first candidate tried the answer.
struct ProjectionHint {
  std::vector<std::size_t> active;
};

inline constexpr std::size_t kMaxPolytopeProjectionDim = 12;

namespace detail {

inline bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t k = idx.size();
  for (std::size_t i = k; i-- > 0;) {
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

/// Equality-constrained least squares on the working set W = eq rows plus
/// `active` inequality rows. Returns the point when it is feasible and all
/// inequality multipliers are nonnegative.
inline std::optional<Vector> try_face(const HalfspacePolytope& poly, std::span<const double> p,
                                      const std::vector<std::size_t>& active) {
  const std::size_t d = poly.dim;
  const std::size_t n_eq = poly.b_eq.size();
  const std::size_t k = n_eq + active.size();
  if (k > d) return std::nullopt;

  Vector v(p.begin(), p.end());
  Vector lambda;
  if (k > 0) {
    auto row = [&](std::size_t w) {
      return w < n_eq ? poly.a_eq.row(w) : poly.a_in.row(active[w - n_eq]);
    };
    auto rhs_of = [&](std::size_t w) { return w < n_eq ? poly.b_eq[w] : poly.b_in[active[w - n_eq]]; };
    DenseMatrix kk(k, k);
    Vector r(k);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i; j < k; ++j) kk(i, j) = kk(j, i) = dot(row(i), row(j));
      r[i] = dot(row(i), p) - rhs_of(i);
    }
    auto sol = solve_linear(kk, r, 1e-10);
    if (!sol) return std::nullopt;
    lambda = std::move(*sol);
    for (std::size_t w = 0; w < k; ++w) {
      auto rw = row(w);
      for (std::size_t j = 0; j < d; ++j) v[j] -= lambda[w] * rw[j];
    }
    for (std::size_t w = n_eq; w < k; ++w)
      if (lambda[w] < -1e-10) return std::nullopt;
  }
  for (std::size_t i = 0; i < poly.b_in.size(); ++i) {
    if (dot(poly.a_in.row(i), v) > poly.b_in[i] + 1e-10 * (1.0 + std::abs(poly.b_in[i]))) {
      return std::nullopt;
    }
  }
  return v;
}

inline Vector project_polytope(const HalfspacePolytope& poly, std::span<const double> p,
                               ProjectionHint* hint) {
  if (poly.empty) raise(ErrorCode::kInfeasibleSet, "projection onto an empty polytope");
  if (poly.dim > kMaxPolytopeProjectionDim) {
    raise(ErrorCode::kUnsupported, "polytope projection is limited to dimension 12");
  }
  if (hint) {
    if (auto v = try_face(poly, p, hint->active)) return *v;
  }
  const std::size_t m = poly.b_in.size();
  const std::size_t max_k = std::min(m, poly.dim - std::min(poly.dim, poly.b_eq.size()));
  for (std::size_t k = 0; k <= max_k; ++k) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    do {
      if (auto v = try_face(poly, p, idx)) {
        if (hint) hint->active = idx;
        return *v;
      }
    } while (k > 0 && next_combination(idx, m));
  }
  raise(ErrorCode::kLpFailure, "no KKT-consistent face found during polytope projection");
}

}  // namespace detail

inline Vector project(const FeasibleSet& set, std::span<const double> point,
                      ProjectionHint* hint = nullptr) {
  detail::check_dim(set, point.size());
  return std::visit(
      [&](const auto& k) -> Vector {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Simplex>) {
          return detail::project_simplex(point);
        } else if constexpr (std::is_same_v<T, Box>) {
          Vector out(point.size());
          for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(point[i], k.lo[i], k.hi[i]);
          return out;
        } else if constexpr (std::is_same_v<T, HalfspacePolytope>) {
          return detail::project_polytope(k, point, hint);
        } else if constexpr (std::is_same_v<T, CurvedRegion>) {
          return detail::project_curved(k, point);
        } else {
          Vector out;
          out.reserve(point.size());
          std::size_t off = 0;
          for (const auto& f : k.factors) {
            auto part = project(f, point.subspan(off, f.dim()));
            out.insert(out.end(), part.begin(), part.end());
            off += f.dim();
          }
          return out;
        }
      },
      set.kind());
}

inline bool contains(const FeasibleSet& set, std::span<const double> point, double tol) {
  detail::check_dim(set, point.size());
  return std::visit(
      [&](const auto& k) -> bool {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Simplex>) {
          double s = 0.0;
          for (double v : point) {
            if (v < -tol) return false;
            s += v;
          }
          return std::abs(s - 1.0) <= tol;
        } else if constexpr (std::is_same_v<T, Box>) {
          for (std::size_t i = 0; i < point.size(); ++i)
            if (point[i] < k.lo[i] - tol || point[i] > k.hi[i] + tol) return false;
          return true;
        } else if constexpr (std::is_same_v<T, HalfspacePolytope>) {
          if (k.empty) return false;
          for (std::size_t i = 0; i < k.b_in.size(); ++i)
            if (dot(k.a_in.row(i), point) > k.b_in[i] + tol) return false;
          for (std::size_t i = 0; i < k.b_eq.size(); ++i)
            if (std::abs(dot(k.a_eq.row(i), point) - k.b_eq[i]) > tol) return false;
          return true;
        } else if constexpr (std::is_same_v<T, CurvedRegion>) {
          const double a = point[0], b = point[1];
          return a >= -tol && a <= 0.5 + tol && b >= -tol && b <= k.b_max() + tol &&
                 std::pow(std::max(a, 0.0), k.n) <= b + tol;
        } else {
          std::size_t off = 0;
          for (const auto& f : k.factors) {
            if (!contains(f, point.subspan(off, f.dim()), tol)) return false;
            off += f.dim();
          }
          return true;
        }
      },
      set.kind());
}

// ---------------------------------------------------------------------------
// Vertices, diameter, sampling

inline constexpr std::size_t kMaxVertices = 10000;

namespace detail {

inline std::vector<Vector> polytope_vertices(const HalfspacePolytope& poly, std::size_t limit) {
  if (poly.empty) return {};
  const std::size_t d = poly.dim;
  const std::size_t n_eq = poly.b_eq.size();
  const std::size_t m = poly.b_in.size();
  std::vector<Vector> out;
  if (n_eq > d) return out;
  const std::size_t k = d - n_eq;
  if (k > m) return out;  // unbounded or lower-dimensional in an unusual way

  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  do {
    DenseMatrix sys(d, d);
    Vector rhs(d);
    for (std::size_t r = 0; r < d; ++r) {
      auto row = r < n_eq ? poly.a_eq.row(r) : poly.a_in.row(idx[r - n_eq]);
      for (std::size_t j = 0; j < d; ++j) sys(r, j) = row[j];
      rhs[r] = r < n_eq ? poly.b_eq[r] : poly.b_in[idx[r - n_eq]];
    }
    auto v = solve_linear(sys, rhs, 1e-10);
    if (!v) continue;
    bool feasible = true;
    for (std::size_t i = 0; i < m && feasible; ++i)
      feasible = dot(poly.a_in.row(i), *v) <= poly.b_in[i] + 1e-9;
    if (!feasible) continue;
    const bool dup = std::any_of(out.begin(), out.end(),
                                 [&](const Vector& w) { return dist_sq(w, *v) <= 1e-20; });
    if (dup) continue;
    out.push_back(std::move(*v));
    if (out.size() > limit) raise(ErrorCode::kTooManyVertices, "vertex count exceeds limit");
  } while (k > 0 && next_combination(idx, m));
  return out;
}

}  // namespace detail

/// Vertex list when the set is a polytope with at most `limit` vertices;
/// nullopt for curved sets or when the count exceeds `limit`.
inline std::optional<std::vector<Vector>> vertices(const FeasibleSet& set,
                                                   std::size_t limit = kMaxVertices) {
  return std::visit(
      [&](const auto& k) -> std::optional<std::vector<Vector>> {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Simplex>) {
          if (k.dim > limit) return std::nullopt;
          std::vector<Vector> out;
          for (std::size_t i = 0; i < k.dim; ++i) {
            Vector e(k.dim, 0.0);
            e[i] = 1.0;
            out.push_back(std::move(e));
          }
          return out;
        } else if constexpr (std::is_same_v<T, Box>) {
          const std::size_t d = k.lo.size();
          if (d >= 63 || (std::size_t{1} << d) > limit) return std::nullopt;
          std::vector<Vector> out;
          for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
            Vector v(d);
            for (std::size_t i = 0; i < d; ++i) v[i] = (mask >> i) & 1 ? k.hi[i] : k.lo[i];
            out.push_back(std::move(v));
          }
          return out;
        } else if constexpr (std::is_same_v<T, HalfspacePolytope>) {
          try {
            return detail::polytope_vertices(k, limit);
          } catch (const Error& e) {
            if (e.code() == ErrorCode::kTooManyVertices) return std::nullopt;
            throw;
          }
        } else if constexpr (std::is_same_v<T, CurvedRegion>) {
          return std::nullopt;
        } else {
          std::vector<Vector> acc{Vector{}};
          for (const auto& f : k.factors) {
            auto fv = vertices(f, limit);
            if (!fv) return std::nullopt;
            if (acc.size() * fv->size() > limit) return std::nullopt;
            std::vector<Vector> next;
            for (const auto& a : acc)
              for (const auto& b : *fv) {
                Vector c = a;
                c.insert(c.end(), b.begin(), b.end());
                next.push_back(std::move(c));
              }
            acc = std::move(next);
          }
          return acc;
        }
      },
      set.kind());
}

inline double diameter(const FeasibleSet& set) {
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Simplex>) {
          return k.dim >= 2 ? std::sqrt(2.0) : 0.0;
        } else if constexpr (std::is_same_v<T, Box>) {
          return std::sqrt(dist_sq(k.lo, k.hi));
        } else if constexpr (std::is_same_v<T, HalfspacePolytope>) {
          const auto vs = detail::polytope_vertices(k, kMaxVertices);
          double best = 0.0;
          for (std::size_t i = 0; i < vs.size(); ++i)
            for (std::size_t j = i + 1; j < vs.size(); ++j) best = std::max(best, dist_sq(vs[i], vs[j]));
          return std::sqrt(best);
        } else if constexpr (std::is_same_v<T, CurvedRegion>) {
          // (0,0) and (1/2, 1/2^n) both belong to the region and span the
          // bounding box diagonal, so the box diameter is attained.
          return std::hypot(0.5, k.b_max());
        } else {
          double s = 0.0;
          for (const auto& f : k.factors) {
            const double d = diameter(f);
            s += d * d;
          }
          return std::sqrt(s);
        }
      },
      set.kind());
}

/// Random feasible point. Simplex draws are uniform (normalized exponentials);
/// curved draws are uniform by rejection from the bounding box; polytope draws
/// are random convex combinations of the vertices.
inline Vector sample_point(const FeasibleSet& set, SplitMix64& rng) {
  return std::visit(
      [&](const auto& k) -> Vector {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Simplex>) {
          Vector v(k.dim);
          double s = 0.0;
          for (double& e : v) s += (e = rng.exponential());
          for (double& e : v) e /= s;
          return v;
        } else if constexpr (std::is_same_v<T, Box>) {
          Vector v(k.lo.size());
          for (std::size_t i = 0; i < v.size(); ++i) v[i] = rng.uniform(k.lo[i], k.hi[i]);
          return v;
        } else if constexpr (std::is_same_v<T, HalfspacePolytope>) {
          const auto vs = detail::polytope_vertices(k, kMaxVertices);
          if (vs.empty()) raise(ErrorCode::kInfeasibleSet, "cannot sample an empty polytope");
          Vector w(vs.size());
          double s = 0.0;
          for (double& e : w) s += (e = rng.exponential());
          Vector v(k.dim, 0.0);
          for (std::size_t i = 0; i < vs.size(); ++i)
            for (std::size_t j = 0; j < k.dim; ++j) v[j] += (w[i] / s) * vs[i][j];
          return v;
        } else if constexpr (std::is_same_v<T, CurvedRegion>) {
          for (;;) {
            const double a = rng.uniform(0.0, 0.5);
            const double b = rng.uniform(0.0, k.b_max());
            if (std::pow(a, k.n) <= b) return {a, b};
          }
        } else {
          Vector out;
          for (const auto& f : k.factors) {
            auto part = sample_point(f, rng);
            out.insert(out.end(), part.begin(), part.end());
          }
          return out;
        }
      },
      set.kind());
}

// ---------------------------------------------------------------------------
// Bregman divergences

enum class Regularizer { kEuclidean, kEntropy };

inline std::string_view to_string(Regularizer r) {
  return r == Regularizer::kEuclidean ? "euclidean" : "entropy";
}

/// Euclidean: 1/2 ||u - v||^2. Entropy: sum u ln(u/v) - sum u + sum v with
/// 0 ln 0 = 0, which is KL(u, v) on probability vectors.
inline double bregman(Regularizer reg, std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) raise(ErrorCode::kDimensionMismatch, "bregman: length mismatch");
  if (reg == Regularizer::kEuclidean) return 0.5 * dist_sq(u, v);
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] < 0.0 || v[i] < 0.0) raise(ErrorCode::kDomainError, "entropy divergence of a negative entry");
    if (u[i] > 0.0) {
      if (v[i] == 0.0) raise(ErrorCode::kDomainError, "entropy divergence with v_i = 0 < u_i");
      // log u - log v stays finite when v is subnormal and u / v would overflow.
      acc += u[i] * (std::log(u[i]) - std::log(v[i])) - u[i] + v[i];
    } else {
      acc += v[i];
    }
  }
  return acc;
}

inline double bregman(Regularizer reg, const JointPoint& u, const JointPoint& v) {
  return bregman(reg, u.x, v.x) + bregman(reg, u.y, v.y);
}

inline double kl_joint(const JointPoint& z_star, const JointPoint& z) {
  return bregman(Regularizer::kEntropy, z_star, z);
}

}  // namespace ogda
