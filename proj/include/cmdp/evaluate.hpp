#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cmdp/grid.hpp"
#include "cmdp/model.hpp"

namespace cmdp {

/// Exact policy evaluation by backward induction under arbitrary transitions,
/// for any per-(h,s,a) reward table.
inline ValueTable evaluate_policy(const Table4& transitions, const PolicyTable& policy,
                                  const Table3& reward_fn) {
  const int H = transitions.horizon();
  const int S = transitions.states();
  const int A = transitions.actions();
  if (!policy.probs.same_shape(reward_fn) || reward_fn.horizon() != H ||
      reward_fn.states() != S || reward_fn.actions() != A)
    throw std::invalid_argument("evaluate_policy: table shapes do not match");

  ValueTable out;
  out.v = Table2(H, S);
  out.q = Table3(H, S, A);
  std::vector<double> v_next(S, 0.0);
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      double v = 0.0;
      for (int a = 0; a < A; ++a) {
        double q = reward_fn(h, s, a);
        if (h + 1 < H) {
          auto p = transitions.row(h, s, a);
          for (int next = 0; next < S; ++next) q += p[next] * v_next[next];
        }
        out.q(h, s, a) = q;
        v += policy.probs(h, s, a) * q;
      }
      out.v(h, s) = v;
    }
    for (int s = 0; s < S; ++s) v_next[s] = out.v(h, s);
  }
  return out;
}

inline ValueTable evaluate_policy(const CmdpModel& model, const PolicyTable& policy,
                                  const Table3& reward_fn) {
  return evaluate_policy(model.transitions, policy, reward_fn);
}

/// Value at the initial state, V_{r'}^pi.
inline double start_value(const CmdpModel& model, const ValueTable& values) {
  return values.v(0, model.initial_state);
}

inline double policy_value(const CmdpModel& model, const PolicyTable& policy,
                           const Table3& reward_fn) {
  return start_value(model, evaluate_policy(model, policy, reward_fn));
}

/// Occupancy measure d_h(s,a) via the forward flow recursion.
inline OccupancyMeasure occupancy_of_policy(const CmdpModel& model, const PolicyTable& policy) {
  const int H = model.horizon;
  const int S = model.num_states;
  const int A = model.num_actions;
  if (policy.horizon() != H || policy.states() != S || policy.actions() != A)
    throw std::invalid_argument("occupancy_of_policy: policy shape mismatch");

  OccupancyMeasure occ;
  occ.d = Table3(H, S, A);
  std::vector<double> state_mass(S, 0.0);
  state_mass[model.initial_state] = 1.0;
  for (int h = 0; h < H; ++h) {
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) occ.d(h, s, a) = state_mass[s] * policy.probs(h, s, a);
    if (h + 1 < H) {
      std::vector<double> next_mass(S, 0.0);
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          double mass = occ.d(h, s, a);
          if (mass == 0.0) continue;
          auto p = model.transitions.row(h, s, a);
          for (int next = 0; next < S; ++next) next_mass[next] += mass * p[next];
        }
      state_mass = next_mass;
    }
  }
  return occ;
}

/// Per-step state marginals P_pi[s_h = s].
inline Table2 state_marginals(const OccupancyMeasure& occ) {
  Table2 m(occ.d.horizon(), occ.d.states());
  for (int h = 0; h < occ.d.horizon(); ++h)
    for (int s = 0; s < occ.d.states(); ++s) {
      double sum = 0.0;
      for (double v : occ.d.row(h, s)) sum += v;
      m(h, s) = sum;
    }
  return m;
}

/// Policy entropy H(pi) = -E_pi[sum_h log pi_h(a_h|s_h)], evaluated as the
/// value of the reward table -log pi. Zero probabilities are tolerated only
/// where the state is unreachable under pi.
inline double entropy_value(const CmdpModel& model, const PolicyTable& policy) {
  Table2 reach = state_marginals(occupancy_of_policy(model, policy));
  Table3 neg_log(model.horizon, model.num_states, model.num_actions);
  for (int h = 0; h < model.horizon; ++h)
    for (int s = 0; s < model.num_states; ++s)
      for (int a = 0; a < model.num_actions; ++a) {
        double p = policy.probs(h, s, a);
        if (p <= 0.0) {
          if (reach(h, s) > 0.0)
            throw std::domain_error("entropy_value: zero probability at a reachable state");
          neg_log(h, s, a) = 0.0;
        } else {
          neg_log(h, s, a) = -std::log(p);
        }
      }
  return policy_value(model, policy, neg_log);
}

/// Lagrangian L(pi, lambda) = V_r + sum_i lambda_i (V_{u_i} - c_i).
inline double lagrangian(const CmdpModel& model, const PolicyTable& policy,
                         const DualVector& lambda) {
  if (lambda.size() != model.num_constraints)
    throw std::invalid_argument("lagrangian: multiplier count mismatch");
  double value = policy_value(model, policy, model.reward);
  for (int i = 0; i < model.num_constraints; ++i)
    value += lambda.values[i] *
             (policy_value(model, policy, model.constraints[i]) - model.thresholds[i]);
  return value;
}

/// L_tau(pi, lambda) = L(pi, lambda) + tau (H(pi) + 0.5 ||lambda||^2).
inline double regularized_lagrangian(const CmdpModel& model, const PolicyTable& policy,
                                     const DualVector& lambda, double tau) {
  if (tau < 0.0) throw std::domain_error("regularized_lagrangian: tau must be non-negative");
  double sq = 0.0;
  for (double v : lambda.values) sq += v * v;
  return lagrangian(model, policy, lambda) +
         tau * (entropy_value(model, policy) + 0.5 * sq);
}

/// Occupancy-weighted KL divergence
///   sum_{h,s} P_ref[s_h = s] KL(ref_h(.|s) || pi_h(.|s)).
/// States the reference never reaches contribute zero, even if the row KL
/// would be infinite there.
inline double kl_weighted(const CmdpModel& model, const PolicyTable& reference,
                          const PolicyTable& policy) {
  if (!reference.probs.same_shape(policy.probs))
    throw std::invalid_argument("kl_weighted: policy shapes do not match");
  Table2 weights = state_marginals(occupancy_of_policy(model, reference));
  double total = 0.0;
  for (int h = 0; h < model.horizon; ++h)
    for (int s = 0; s < model.num_states; ++s) {
      double w = weights(h, s);
      if (w <= 0.0) continue;
      double row = 0.0;
      for (int a = 0; a < model.num_actions; ++a) {
        double ref = reference.probs(h, s, a);
        if (ref <= 0.0) continue;
        double p = policy.probs(h, s, a);
        if (p <= 0.0)
          throw std::domain_error("kl_weighted: policy lacks support of the reference");
        row += ref * std::log(ref / p);
      }
      total += w * row;
    }
  return total;
}

struct PotentialDiagnostics {
  double kl_term = 0.0;
  double dual_term = 0.0;
  double phi = 0.0;
};

/// Potential Phi = occupancy-weighted KL to the reference policy plus half
/// the squared dual distance. The reference pair is an approximation of the
/// regularized saddle point (see reference_saddle_point), so Phi values are
/// diagnostics, not exact optimality gaps.
inline PotentialDiagnostics potential_phi(const CmdpModel& model,
                                          const PolicyTable& reference_policy,
                                          const DualVector& reference_lambda,
                                          const PolicyTable& policy, const DualVector& lambda) {
  if (reference_lambda.size() != lambda.size())
    throw std::invalid_argument("potential_phi: dual sizes do not match");
  PotentialDiagnostics out;
  out.kl_term = kl_weighted(model, reference_policy, policy);
  for (int i = 0; i < lambda.size(); ++i) {
    double diff = reference_lambda.values[i] - lambda.values[i];
    out.dual_term += 0.5 * diff * diff;
  }
  out.phi = out.kl_term + out.dual_term;
  return out;
}

}  // namespace cmdp
