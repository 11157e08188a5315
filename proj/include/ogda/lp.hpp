#pragma once

// Dense two-phase simplex method with Bland's rule.
//
//   minimize c^T v  subject to  A_ub v <= b_ub,  A_eq v = b_eq,  v >= 0.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "ogda/error.hpp"
#include "ogda/numerics.hpp"

namespace ogda {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpSolution {
  double objective = 0.0;
  Vector point;
  LpStatus status = LpStatus::kInfeasible;
};

namespace detail {

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_((rows + 1) * (cols + 1), 0.0), basis_(rows, 0) {}

  double& at(std::size_t i, std::size_t j) { return a_[i * (cols_ + 1) + j]; }
  double& rhs(std::size_t i) { return a_[i * (cols_ + 1) + cols_]; }
  // Row `rows_` holds reduced costs; its rhs entry holds -objective.
  double& cost(std::size_t j) { return at(rows_, j); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t r, std::size_t c) {
    const std::size_t w = cols_ + 1;
    double* pr = &a_[r * w];
    const double inv = 1.0 / pr[c];
    for (std::size_t j = 0; j < w; ++j) pr[j] *= inv;
    pr[c] = 1.0;
    for (std::size_t i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      double* pi = &a_[i * w];
      const double f = pi[c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < w; ++j) pi[j] -= f * pr[j];
      pi[c] = 0.0;
    }
    basis_[r] = c;
  }

  /// Loads `costs` into the objective row and prices out the basis.
  void set_costs(const Vector& costs) {
    for (std::size_t j = 0; j <= cols_; ++j) cost(j) = j < cols_ ? costs[j] : 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      const double cb = costs[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) at(rows_, j) -= cb * at(i, j);
    }
  }

  void remove_row(std::size_t r) {
    const std::size_t w = cols_ + 1;
    a_.erase(a_.begin() + static_cast<std::ptrdiff_t>(r * w),
             a_.begin() + static_cast<std::ptrdiff_t>((r + 1) * w));
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
    --rows_;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  Vector a_;
  std::vector<std::size_t> basis_;
};

constexpr double kLpPivotTol = 1e-11;
constexpr double kLpCostTol = 1e-11;
constexpr double kLpFeasTol = 1e-9;

enum class PhaseResult { kOptimal, kUnbounded };

/// Bland's rule: lowest-index improving column, lowest-basis-index tie break
/// on the ratio test. Columns with allowed[j] == false never enter.
inline PhaseResult run_phase(Tableau& t, const std::vector<bool>& allowed) {
  const std::size_t max_iter = 50000 + 50 * (t.rows() + t.cols());
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    std::size_t enter = t.cols();
    for (std::size_t j = 0; j < t.cols(); ++j) {
      if (allowed[j] && t.cost(j) < -kLpCostTol) {
        enter = j;
        break;
      }
    }
    if (enter == t.cols()) return PhaseResult::kOptimal;

    std::size_t leave = t.rows();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const double aij = t.at(i, enter);
      if (aij <= kLpPivotTol) continue;
      const double ratio = std::max(t.rhs(i), 0.0) / aij;
      const bool tie = leave < t.rows() && std::abs(ratio - best) <= 1e-14;
      if ((ratio < best && !tie) || (tie && t.basis()[i] < t.basis()[leave])) {
        best = ratio;
        leave = i;
      }
    }
    if (leave == t.rows()) return PhaseResult::kUnbounded;
    t.pivot(leave, enter);
  }
  raise(ErrorCode::kLpFailure, "simplex iteration limit reached");
}

}  // namespace detail

inline LpSolution simplex_lp(const Vector& c, const DenseMatrix& a_ub, const Vector& b_ub,
                             const DenseMatrix& a_eq, const Vector& b_eq) {
  const std::size_t n = c.size();
  const std::size_t m_ub = a_ub.empty() ? 0 : a_ub.rows();
  const std::size_t m_eq = a_eq.empty() ? 0 : a_eq.rows();
  if ((m_ub > 0 && a_ub.cols() != n) || (m_eq > 0 && a_eq.cols() != n) || b_ub.size() != m_ub ||
      b_eq.size() != m_eq) {
    raise(ErrorCode::kDimensionMismatch, "simplex_lp: inconsistent constraint dimensions");
  }
  const std::size_t m = m_ub + m_eq;

  // Columns: originals, one slack per inequality, one artificial per row that
  // lacks a natural unit column.
  std::vector<bool> needs_art(m, true);
  for (std::size_t i = 0; i < m_ub; ++i) needs_art[i] = b_ub[i] < 0.0;
  std::size_t n_art = 0;
  for (bool b : needs_art) n_art += b ? 1 : 0;
  const std::size_t n_cols = n + m_ub + n_art;

  detail::Tableau t(m, n_cols);
  std::size_t art = n + m_ub;
  for (std::size_t i = 0; i < m; ++i) {
    const bool ub = i < m_ub;
    const double b = ub ? b_ub[i] : b_eq[i - m_ub];
    const double sign = b < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) t.at(i, j) = sign * (ub ? a_ub(i, j) : a_eq(i - m_ub, j));
    if (ub) t.at(i, n + i) = sign;
    t.rhs(i) = sign * b;
    if (needs_art[i]) {
      t.at(i, art) = 1.0;
      t.basis()[i] = art++;
    } else {
      t.basis()[i] = n + i;
    }
  }

  LpSolution sol;
  std::vector<bool> allowed(n_cols, true);

  if (n_art > 0) {
    Vector phase1(n_cols, 0.0);
    for (std::size_t j = n + m_ub; j < n_cols; ++j) phase1[j] = 1.0;
    t.set_costs(phase1);
    detail::run_phase(t, allowed);
    double infeas = 0.0;
    for (std::size_t i = 0; i < t.rows(); ++i)
      if (t.basis()[i] >= n + m_ub) infeas += std::abs(t.rhs(i));
    double scale = 1.0;
    for (std::size_t i = 0; i < m_ub; ++i) scale = std::max(scale, std::abs(b_ub[i]));
    for (std::size_t i = 0; i < m_eq; ++i) scale = std::max(scale, std::abs(b_eq[i]));
    if (infeas > detail::kLpFeasTol * scale) {
      sol.status = LpStatus::kInfeasible;
      return sol;
    }
    // Drive remaining artificials out of the basis; a row with no usable
    // pivot is a redundant equality and is dropped.
    for (std::size_t i = t.rows(); i-- > 0;) {
      if (t.basis()[i] < n + m_ub) continue;
      std::size_t col = n + m_ub;
      for (std::size_t j = 0; j < n + m_ub; ++j) {
        if (std::abs(t.at(i, j)) > 1e-9) {
          col = j;
          break;
        }
      }
      if (col < n + m_ub) {
        t.pivot(i, col);
      } else {
        t.remove_row(i);
      }
    }
    for (std::size_t j = n + m_ub; j < n_cols; ++j) allowed[j] = false;
  }

  Vector phase2(n_cols, 0.0);
  for (std::size_t j = 0; j < n; ++j) phase2[j] = c[j];
  t.set_costs(phase2);
  if (detail::run_phase(t, allowed) == detail::PhaseResult::kUnbounded) {
    sol.status = LpStatus::kUnbounded;
    return sol;
  }

  sol.point.assign(n, 0.0);
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const std::size_t bj = t.basis()[i];
    if (bj < n) sol.point[bj] = std::max(t.rhs(i), 0.0);
  }
  sol.objective = dot(c, sol.point);
  sol.status = LpStatus::kOptimal;
  return sol;
}

/// Convenience overload for problems without equality rows.
inline LpSolution simplex_lp(const Vector& c, const DenseMatrix& a_ub, const Vector& b_ub) {
  return simplex_lp(c, a_ub, b_ub, DenseMatrix{}, Vector{});
}

}  // namespace ogda
