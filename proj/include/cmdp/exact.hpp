#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cmdp/evaluate.hpp"
#include "cmdp/model.hpp"
#include "cmdp/simplex.hpp"

namespace cmdp {

/// The constraint set admits no policy: U d >= c cannot be met.
struct InfeasibleModel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The LP machinery itself failed (unbounded or numerically stuck).
struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OptimalSolution {
  double optimal_value = 0.0;
  OccupancyMeasure optimal_occupancy;
  PolicyTable optimal_policy;
  std::optional<std::vector<double>> dual_estimate;
};

struct SlaterCertificate {
  double gap = 0.0;  // Xi; negative means the constraint set is infeasible
  PolicyTable witness;
};

struct PlanResult {
  PolicyTable policy;
  ValueTable values;
  double value = 0.0;  // at the initial state
};

/// Policy recovered from an occupancy measure, pi_h(a|s) = d_h(s,a) / d_h(s);
/// unreached states get the uniform row.
inline PolicyTable policy_from_occupancy(const OccupancyMeasure& occupancy) {
  const Table3& d = occupancy.d;
  PolicyTable pi;
  pi.probs = Table3(d.horizon(), d.states(), d.actions());
  for (int h = 0; h < d.horizon(); ++h)
    for (int s = 0; s < d.states(); ++s) {
      double mass = 0.0;
      for (double v : d.row(h, s)) mass += v;
      for (int a = 0; a < d.actions(); ++a)
        pi.probs(h, s, a) = mass > 0.0 ? d(h, s, a) / mass : 1.0 / d.actions();
    }
  return pi;
}

/// Greedy backward-induction planner; ties break toward the lowest action
/// index so plans are identical across platforms.
inline PlanResult dp_plan(const Table4& transitions, const Table3& reward_fn, int initial_state) {
  const int H = transitions.horizon();
  const int S = transitions.states();
  const int A = transitions.actions();
  if (reward_fn.horizon() != H || reward_fn.states() != S || reward_fn.actions() != A)
    throw std::invalid_argument("dp_plan: reward table shape mismatch");

  PlanResult out;
  out.policy.probs = Table3(H, S, A);
  out.values.v = Table2(H, S);
  out.values.q = Table3(H, S, A);
  std::vector<double> v_next(S, 0.0);
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      int best = 0;
      double best_q = 0.0;
      for (int a = 0; a < A; ++a) {
        double q = reward_fn(h, s, a);
        auto p = transitions.row(h, s, a);
        for (int next = 0; next < S; ++next) q += p[next] * v_next[next];
        out.values.q(h, s, a) = q;
        if (a == 0 || q > best_q) {
          best = a;
          best_q = q;
        }
      }
      out.policy.probs(h, s, best) = 1.0;
      out.values.v(h, s) = best_q;
    }
    for (int s = 0; s < S; ++s) v_next[s] = out.values.v(h, s);
  }
  out.value = out.values.v(0, initial_state);
  return out;
}

inline PlanResult dp_plan(const CmdpModel& model, const Table3& reward_fn) {
  return dp_plan(model.transitions, reward_fn, model.initial_state);
}

namespace detail {

// Occupancy-measure flow rows shared by the value LP and the Slater LP.
// Variable layout: d entries first, flattened (h, s, a); extras appended by
// the caller. Row layout: H*S flow equalities, then I constraint rows.
inline void fill_flow_rows(const CmdpModel& model, int num_vars, LpProblem& lp) {
  const int H = model.horizon;
  const int S = model.num_states;
  const int A = model.num_actions;
  auto var = [&](int h, int s, int a) { return (h * S + s) * A + a; };
  auto at = [&](int row, int col) -> double& {
    return lp.matrix[static_cast<std::size_t>(row) * num_vars + col];
  };
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) at(s, var(0, s, a)) = 1.0;
    lp.rhs[s] = (s == model.initial_state) ? 1.0 : 0.0;
  }
  for (int h = 1; h < H; ++h)
    for (int next = 0; next < S; ++next) {
      int row = h * S + next;
      for (int a = 0; a < A; ++a) at(row, var(h, next, a)) = 1.0;
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
          at(row, var(h - 1, s, a)) -= model.transitions(h - 1, s, a, next);
      lp.rhs[row] = 0.0;
    }
}

inline OccupancyMeasure occupancy_from_lp(const CmdpModel& model, const std::vector<double>& x) {
  OccupancyMeasure occ;
  occ.d = Table3(model.horizon, model.num_states, model.num_actions);
  std::size_t idx = 0;
  for (int h = 0; h < model.horizon; ++h)
    for (int s = 0; s < model.num_states; ++s)
      for (int a = 0; a < model.num_actions; ++a) occ.d(h, s, a) = std::max(0.0, x[idx++]);
  return occ;
}

}  // namespace detail

/// Largest margin by which any policy clears all constraints:
///   Xi = max { t : U d >= c + t 1 over the flow polytope }.
/// Always solvable; Xi < 0 certifies infeasibility of the constraint set.
inline SlaterCertificate slater_gap(const CmdpModel& model) {
  model.validate();
  const int H = model.horizon;
  const int S = model.num_states;
  const int A = model.num_actions;
  const int I = model.num_constraints;
  const int d_vars = H * S * A;
  // Columns: d, t+, t-, then one surplus per constraint.
  const int num_vars = d_vars + 2 + I;
  LpProblem lp;
  lp.num_vars = num_vars;
  lp.num_rows = H * S + I;
  lp.objective.assign(num_vars, 0.0);
  lp.matrix.assign(static_cast<std::size_t>(lp.num_rows) * num_vars, 0.0);
  lp.rhs.assign(lp.num_rows, 0.0);
  lp.objective[d_vars] = 1.0;
  lp.objective[d_vars + 1] = -1.0;
  detail::fill_flow_rows(model, num_vars, lp);
  for (int i = 0; i < I; ++i) {
    int row = H * S + i;
    std::size_t base = static_cast<std::size_t>(row) * num_vars;
    std::size_t idx = 0;
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) lp.matrix[base + idx++] = model.constraints[i](h, s, a);
    lp.matrix[base + d_vars] = -1.0;
    lp.matrix[base + d_vars + 1] = 1.0;
    lp.matrix[base + d_vars + 2 + i] = -1.0;
    lp.rhs[row] = model.thresholds[i];
  }
  LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::optimal) throw SolverFailure("slater_gap: LP did not solve");
  SlaterCertificate cert;
  cert.gap = sol.objective_value;
  cert.witness = policy_from_occupancy(detail::occupancy_from_lp(model, sol.x));
  return cert;
}

namespace detail {

// Dual multiplier for the single-constraint case, recovered by bisecting the
// kink of the piecewise-linear dual function lambda -> max_pi L(pi, lambda).
// Strong duality of the occupancy LP makes the crossing point an optimal
// multiplier.
inline double bisect_single_dual(const CmdpModel& model, double hi) {
  auto slope = [&](double lambda) {
    Table3 mixed = model.reward;
    for (int h = 0; h < model.horizon; ++h)
      for (int s = 0; s < model.num_states; ++s)
        for (int a = 0; a < model.num_actions; ++a)
          mixed(h, s, a) += lambda * model.constraints[0](h, s, a);
    PlanResult plan = dp_plan(model, mixed);
    return policy_value(model, plan.policy, model.constraints[0]) - model.thresholds[0];
  };
  if (slope(0.0) >= 0.0) return 0.0;
  double lo = 0.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-10; ++iter) {
    double mid = 0.5 * (lo + hi);
    (slope(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Exact constrained optimum via the occupancy-measure LP:
///   maximize r . d  over the flow polytope  subject to  U d >= c.
/// Throws InfeasibleModel when no occupancy satisfies the constraints.
inline OptimalSolution solve_cmdp_lp(const CmdpModel& model) {
  model.validate();
  const int H = model.horizon;
  const int S = model.num_states;
  const int A = model.num_actions;
  const int I = model.num_constraints;
  const int d_vars = H * S * A;
  const int num_vars = d_vars + I;  // d then one surplus per constraint
  LpProblem lp;
  lp.num_vars = num_vars;
  lp.num_rows = H * S + I;
  lp.objective.assign(num_vars, 0.0);
  lp.matrix.assign(static_cast<std::size_t>(lp.num_rows) * num_vars, 0.0);
  lp.rhs.assign(lp.num_rows, 0.0);
  {
    std::size_t idx = 0;
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) lp.objective[idx++] = model.reward(h, s, a);
  }
  detail::fill_flow_rows(model, num_vars, lp);
  for (int i = 0; i < I; ++i) {
    int row = H * S + i;
    std::size_t base = static_cast<std::size_t>(row) * num_vars;
    std::size_t idx = 0;
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) lp.matrix[base + idx++] = model.constraints[i](h, s, a);
    lp.matrix[base + d_vars + i] = -1.0;
    lp.rhs[row] = model.thresholds[i];
  }
  LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::infeasible)
    throw InfeasibleModel("solve_cmdp_lp: no policy satisfies the constraints");
  if (sol.status != LpStatus::optimal) throw SolverFailure("solve_cmdp_lp: LP did not solve");

  OptimalSolution out;
  out.optimal_value = sol.objective_value;
  out.optimal_occupancy = detail::occupancy_from_lp(model, sol.x);
  out.optimal_policy = policy_from_occupancy(out.optimal_occupancy);
  if (I == 1) {
    double xi = slater_gap(model).gap;
    if (xi > 1e-6)
      out.dual_estimate = std::vector<double>{
          detail::bisect_single_dual(model, 2.0 * model.horizon / xi + 1.0)};
  }
  return out;
}

}  // namespace cmdp
