#pragma once

// Shared numerical plumbing: the SplitMix64 stream, a small dense matrix,
// vector helpers, the spectral norm and log-scale rate fits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ogda/error.hpp"

namespace ogda {

using Vector = std::vector<double>;

// ---------------------------------------------------------------------------
// Random numbers

struct RngState {
  std::uint64_t state = 0;
};

/// One step of the SplitMix64 recurrence. Pure: the same state always yields
/// the same (value, next) pair on every platform.
constexpr std::pair<std::uint64_t, RngState> splitmix_next(RngState s) noexcept {
  std::uint64_t state = s.state + 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return {z ^ (z >> 31), RngState{state}};
}

/// Maps a raw 64-bit draw to [0, 1). Uses the top 53 bits so the result is
/// exactly u / 2^64 truncated to double precision and never rounds up to 1.
constexpr double unit_interval(std::uint64_t u) noexcept {
  return static_cast<double>(u >> 11) * 0x1.0p-53;
}

constexpr std::pair<double, RngState> uniform_pm1(RngState s) noexcept {
  auto [u, next] = splitmix_next(s);
  return {2.0 * unit_interval(u) - 1.0, next};
}

/// Mutable convenience wrapper over the pure recurrence.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed = 0) noexcept : s_{seed} {}

  std::uint64_t next() noexcept {
    auto [u, n] = splitmix_next(s_);
    s_ = n;
    return u;
  }
  double uniform01() noexcept { return unit_interval(next()); }
  double uniform_pm1() noexcept { return 2.0 * uniform01() - 1.0; }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }
  /// Exponential(1) draw; the open interval avoids log(0).
  double exponential() noexcept { return -std::log1p(-uniform01()); }
  std::size_t below(std::size_t n) noexcept { return static_cast<std::size_t>(next() % n); }

  RngState state() const noexcept { return s_; }

 private:
  RngState s_;
};

// ---------------------------------------------------------------------------
// Dense matrix

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, Vector entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
      raise(ErrorCode::kDimensionMismatch, "matrix entries do not match rows x cols");
    }
  }
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) raise(ErrorCode::kDimensionMismatch, "ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }
  std::span<const double> entries() const noexcept { return data_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  /// G v
  Vector apply(std::span<const double> v) const {
    check_len(v.size(), cols_);
    Vector out(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      const double* r = data_.data() + i * cols_;
      double acc = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) acc += r[j] * v[j];
      out[i] = acc;
    }
    return out;
  }

  /// G^T u
  Vector apply_transposed(std::span<const double> u) const {
    check_len(u.size(), rows_);
    Vector out(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      const double* r = data_.data() + i * cols_;
      const double ui = u[i];
      for (std::size_t j = 0; j < cols_; ++j) out[j] += r[j] * ui;
    }
    return out;
  }

  DenseMatrix transposed() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  DenseMatrix scaled(double c) const {
    DenseMatrix s = *this;
    for (double& v : s.data_) v *= c;
    return s;
  }

  double max_abs() const noexcept {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  static void check_len(std::size_t got, std::size_t want) {
    if (got != want) raise(ErrorCode::kDimensionMismatch, "matrix-vector size mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

// ---------------------------------------------------------------------------
// Vector helpers

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) raise(ErrorCode::kDimensionMismatch, "dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double dist_sq(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) raise(ErrorCode::kDimensionMismatch, "dist: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

inline double norm1_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) raise(ErrorCode::kDimensionMismatch, "dist: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

inline bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

/// Solves the square system M x = rhs by Gaussian elimination with partial
/// pivoting. Returns nullopt when a pivot falls below `pivot_tol` times the
/// largest entry of M, i.e. when M is numerically singular.
inline std::optional<Vector> solve_linear(DenseMatrix m, Vector rhs, double pivot_tol = 1e-12) {
  const std::size_t n = m.rows();
  if (m.cols() != n || rhs.size() != n) {
    raise(ErrorCode::kDimensionMismatch, "solve_linear expects a square system");
  }
  const double scale = std::max(m.max_abs(), std::numeric_limits<double>::min());
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(m(i, k)) > std::abs(m(piv, k))) piv = i;
    if (std::abs(m(piv, k)) <= pivot_tol * scale) return std::nullopt;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
      std::swap(rhs[k], rhs[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = m(i, k) / m(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) m(i, j) -= f * m(k, j);
      rhs[i] -= f * rhs[k];
    }
  }
  Vector x(n, 0.0);
  for (std::size_t k = n; k-- > 0;) {
    double acc = rhs[k];
    for (std::size_t j = k + 1; j < n; ++j) acc -= m(k, j) * x[j];
    x[k] = acc / m(k, k);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Spectral norm

namespace detail {

/// Power iteration on G^T G from v; returns the final Rayleigh quotient
/// ||G v||^2, or 0 when v lies in the null space of G.
inline double power_iteration(const DenseMatrix& g, Vector v, double tol) {
  const double vn = norm2(v);
  for (double& e : v) e /= vn;
  Vector gv = g.apply(v);
  if (norm2(gv) <= 1e-12 * g.max_abs()) return 0.0;
  double lambda = dot(gv, gv);
  constexpr int kMaxIterations = 100000;
  for (int it = 0; it < kMaxIterations; ++it) {
    Vector w = g.apply_transposed(gv);
    const double wn = norm2(w);
    if (wn == 0.0) break;
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = w[j] / wn;
    gv = g.apply(v);
    const double next = dot(gv, gv);
    const bool done = std::abs(next - lambda) < tol * next;
    lambda = next;
    if (done) break;
  }
  return lambda;
}

}  // namespace detail

/// Largest singular value by power iteration on G^T G, started from the
/// all-ones vector. Stops once successive Rayleigh quotients agree to
/// `tol` relative, or after 1e5 iterations.
///
/// All-ones can be orthogonal to the top singular vector (the 5x5 game with
/// a continuum of maximin strategies is one case), so a second run starts
/// from the alternating ramp (1, -2, 3, ...) and the larger estimate wins.
/// If both starts lie in the null space, the heaviest column is used.
inline double operator_norm(const DenseMatrix& g, double tol = 1e-12) {
  if (g.max_abs() == 0.0) raise(ErrorCode::kZeroMatrix, "operator norm of an all-zero matrix");
  if (!(tol > 0.0)) raise(ErrorCode::kDomainError, "operator_norm tolerance must be positive");

  const std::size_t n = g.cols();
  Vector ramp(n);
  for (std::size_t j = 0; j < n; ++j) ramp[j] = (j % 2 == 0 ? 1.0 : -1.0) * static_cast<double>(j + 1);
  double lambda = std::max(detail::power_iteration(g, Vector(n, 1.0), tol), detail::power_iteration(g, ramp, tol));
  if (lambda == 0.0) {
    std::size_t best = 0;
    double best_norm = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < g.rows(); ++i) s += g(i, j) * g(i, j);
      if (s > best_norm) best_norm = s, best = j;
    }
    Vector e(n, 0.0);
    e[best] = 1.0;
    lambda = detail::power_iteration(g, e, tol);
  }
  return std::sqrt(lambda);
}

// ---------------------------------------------------------------------------
// Rate fits

/// Half-open index range [begin, end).
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end > begin ? end - begin : 0; }
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  IndexRange window;
  double r_squared = 0.0;
};

namespace detail {

inline RateFit ols(std::span<const double> xs, std::span<const double> ys, IndexRange window) {
  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += xs[i], my += ys[i];
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  RateFit fit;
  fit.window = window;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  // A constant series is fitted exactly by a flat line.
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

inline void check_window(std::span<const double> series, IndexRange window) {
  if (window.end > series.size() || window.begin >= window.end) {
    raise(ErrorCode::kWindowTooSmall, "fit window is empty or exceeds the series");
  }
  if (window.size() < 3) raise(ErrorCode::kWindowTooSmall, "fit window needs at least 3 points");
  for (std::size_t t = window.begin; t < window.end; ++t) {
    if (!(series[t] > 0.0)) {
      raise(ErrorCode::kNonPositiveValue,
            "series value at index " + std::to_string(t) + " is not positive");
    }
  }
}

}  // namespace detail

/// OLS of ln(series[t]) against t; the slope is the per-step log decrement.
inline RateFit fit_log_linear(std::span<const double> series, IndexRange window) {
  detail::check_window(series, window);
  Vector xs, ys;
  xs.reserve(window.size());
  ys.reserve(window.size());
  for (std::size_t t = window.begin; t < window.end; ++t) {
    xs.push_back(static_cast<double>(t));
    ys.push_back(std::log(series[t]));
  }
  return detail::ols(xs, ys, window);
}

/// OLS of ln(series[t]) against ln(t + t_offset); the slope is the exponent
/// of a polynomial rate. The abscissa t + t_offset must be at least 1.
inline RateFit fit_log_log(std::span<const double> series, IndexRange window,
                           std::size_t t_offset = 0) {
  detail::check_window(series, window);
  if (window.begin + t_offset < 1) {
    raise(ErrorCode::kWindowTooSmall, "log-log fit requires t >= 1");
  }
  Vector xs, ys;
  xs.reserve(window.size());
  ys.reserve(window.size());
  for (std::size_t t = window.begin; t < window.end; ++t) {
    xs.push_back(std::log(static_cast<double>(t + t_offset)));
    ys.push_back(std::log(series[t]));
  }
  return detail::ols(xs, ys, window);
}

}  // namespace ogda
