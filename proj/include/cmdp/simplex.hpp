#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cmdp {

/// Linear program in standard equality form:
///   maximize objective . x   subject to   matrix x = rhs,  x >= 0.
/// rhs entries may carry either sign; rows are normalized internally.
struct LpProblem {
  int num_vars = 0;
  int num_rows = 0;
  std::vector<double> objective;  // size num_vars
  std::vector<double> matrix;     // row-major num_rows x num_vars
  std::vector<double> rhs;        // size num_rows
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
  LpStatus status = LpStatus::optimal;
  double objective_value = 0.0;
  std::vector<double> x;
};

/// Dense two-phase primal simplex with Bland's rule.
///
/// Pivot selection is index-based (smallest eligible entering column,
/// smallest basic variable among ratio ties), which rules out cycling and
/// makes the pivot sequence deterministic across platforms. Intended for
/// the small occupancy-measure programs of this library (a few thousand
/// nonzeros), not for large or sparse instances.
class DenseSimplex {
 public:
  explicit DenseSimplex(const LpProblem& problem, double tol = 1e-9) : tol_(tol) {
    n_ = problem.num_vars;
    m_ = problem.num_rows;
    if (static_cast<int>(problem.objective.size()) != n_ ||
        static_cast<int>(problem.rhs.size()) != m_ ||
        problem.matrix.size() != static_cast<std::size_t>(n_) * m_)
      throw std::invalid_argument("DenseSimplex: inconsistent problem dimensions");
    objective_ = problem.objective;
    // Tableau holds the real columns followed by one artificial per row.
    cols_ = n_ + m_;
    tableau_.assign(static_cast<std::size_t>(m_) * cols_, 0.0);
    rhs_.resize(m_);
    basis_.resize(m_);
    for (int r = 0; r < m_; ++r) {
      double sign = problem.rhs[r] < 0.0 ? -1.0 : 1.0;
      for (int j = 0; j < n_; ++j)
        cell(r, j) = sign * problem.matrix[static_cast<std::size_t>(r) * n_ + j];
      cell(r, n_ + r) = 1.0;
      rhs_[r] = sign * problem.rhs[r];
      basis_[r] = n_ + r;
    }
  }

  LpSolution solve() {
    LpSolution out;

    // Phase 1: maximize minus the sum of artificials.
    std::vector<double> phase1(cols_, 0.0);
    for (int j = n_; j < cols_; ++j) phase1[j] = -1.0;
    double value = run(phase1, /*allow_artificial=*/true);
    if (value < -1e-8) {
      out.status = LpStatus::infeasible;
      return out;
    }
    purge_artificials();

    // Phase 2 on the original objective.
    std::vector<double> phase2(cols_, 0.0);
    for (int j = 0; j < n_; ++j) phase2[j] = objective_[j];
    if (unbounded_) {
      out.status = LpStatus::unbounded;
      return out;
    }
    value = run(phase2, /*allow_artificial=*/false);
    if (unbounded_) {
      out.status = LpStatus::unbounded;
      return out;
    }

    out.status = LpStatus::optimal;
    out.objective_value = value;
    out.x.assign(n_, 0.0);
    for (int r = 0; r < m_; ++r)
      if (basis_[r] < n_) out.x[basis_[r]] = rhs_[r];
    return out;
  }

 private:
  double& cell(int r, int j) { return tableau_[static_cast<std::size_t>(r) * cols_ + j]; }

  // Runs the simplex loop for one phase; returns the phase objective value.
  double run(const std::vector<double>& cost, bool allow_artificial) {
    // Reduced costs c_j - c_B . B^{-1} A_j, canonicalized against the basis.
    std::vector<double> red = cost;
    double shift = 0.0;  // running c_B . x_B
    for (int r = 0; r < m_; ++r) {
      double cb = cost[basis_[r]];
      if (cb == 0.0) continue;
      shift += cb * rhs_[r];
      for (int j = 0; j < cols_; ++j) red[j] -= cb * cell(r, j);
    }

    const int limit = allow_artificial ? cols_ : n_;
    long pivots = 0;
    const long max_pivots = 2000L * (m_ + cols_) + 10000L;
    while (true) {
      if (++pivots > max_pivots)
        throw std::runtime_error("DenseSimplex: pivot limit exceeded");
      int enter = -1;
      for (int j = 0; j < limit; ++j)
        if (red[j] > tol_) {
          enter = j;
          break;  // Bland: smallest improving index
        }
      if (enter < 0) return shift;

      int leave = -1;
      double best_ratio = 0.0;
      for (int r = 0; r < m_; ++r) {
        double coef = cell(r, enter);
        if (coef <= tol_) continue;
        double ratio = rhs_[r] / coef;
        if (leave < 0 || ratio < best_ratio - tol_ ||
            (std::abs(ratio - best_ratio) <= tol_ && basis_[r] < basis_[leave]))
          leave = r, best_ratio = ratio;
      }
      if (leave < 0) {
        unbounded_ = true;
        return shift;
      }
      pivot(leave, enter, red);
      shift += red_shift_;
    }
  }

  void pivot(int row, int col, std::vector<double>& red) {
    double p = cell(row, col);
    for (int j = 0; j < cols_; ++j) cell(row, j) /= p;
    rhs_[row] /= p;
    cell(row, col) = 1.0;
    for (int r = 0; r < m_; ++r) {
      if (r == row) continue;
      double f = cell(r, col);
      if (f == 0.0) continue;
      for (int j = 0; j < cols_; ++j) cell(r, j) -= f * cell(row, j);
      cell(r, col) = 0.0;
      rhs_[r] -= f * rhs_[row];
      if (rhs_[r] < 0.0 && rhs_[r] > -1e-12) rhs_[r] = 0.0;
    }
    double f = red[col];
    red_shift_ = f * rhs_[row];
    if (f != 0.0)
      for (int j = 0; j < cols_; ++j) red[j] -= f * cell(row, j);
    red[col] = 0.0;
    basis_[row] = col;
  }

  // After phase 1, pivot leftover artificial basics onto real columns, or
  // blank out rows that are redundant in the real columns.
  void purge_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      int col = -1;
      for (int j = 0; j < n_; ++j)
        if (std::abs(cell(r, j)) > tol_) {
          col = j;
          break;
        }
      if (col >= 0) {
        std::vector<double> dummy(cols_, 0.0);
        pivot(r, col, dummy);
      } else {
        // Redundant constraint: zero the row so it can never pivot again.
        for (int j = 0; j < cols_; ++j) cell(r, j) = 0.0;
        rhs_[r] = 0.0;
      }
    }
  }

  int n_ = 0, m_ = 0, cols_ = 0;
  double tol_;
  bool unbounded_ = false;
  double red_shift_ = 0.0;
  std::vector<double> objective_;
  std::vector<double> tableau_;
  std::vector<double> rhs_;
  std::vector<int> basis_;
};

inline LpSolution solve_lp(const LpProblem& problem) { return DenseSimplex(problem).solve(); }

}  // namespace cmdp
