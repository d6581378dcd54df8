#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "cmdp/grid.hpp"
#include "cmdp/model.hpp"

namespace cmdp {

/// One observed step of an episode.
struct StepSample {
  int state = 0;
  int action = 0;
  double reward = 0.0;
  std::vector<double> constraint_rewards;
  int next_state = 0;
};

using Trajectory = std::vector<StepSample>;

/// Visit counters and running sums gathered across episodes.
struct EmpiricalModel {
  Count3 visit_counts;                 // n[h][s][a]
  Count4 transition_counts;            // m[h][s][a][s']
  Table3 reward_sums;
  std::vector<Table3> constraint_sums;

  static EmpiricalModel empty(int horizon, int states, int actions, int num_constraints) {
    EmpiricalModel e;
    e.visit_counts = Count3(horizon, states, actions);
    e.transition_counts = Count4(horizon, states, actions);
    e.reward_sums = Table3(horizon, states, actions);
    e.constraint_sums.assign(num_constraints, Table3(horizon, states, actions));
    return e;
  }

  int horizon() const { return visit_counts.horizon(); }
  int states() const { return visit_counts.states(); }
  int actions() const { return visit_counts.actions(); }
  int num_constraints() const { return static_cast<int>(constraint_sums.size()); }
};

/// Adds one length-H trajectory to the counters; every step increments its
/// (h, s, a, s') cell exactly once.
inline void record_trajectory(EmpiricalModel& state, const Trajectory& trajectory) {
  if (static_cast<int>(trajectory.size()) != state.horizon())
    throw std::invalid_argument("record_trajectory: trajectory length must equal the horizon");
  for (int h = 0; h < state.horizon(); ++h) {
    const StepSample& step = trajectory[h];
    if (step.state < 0 || step.state >= state.states() || step.action < 0 ||
        step.action >= state.actions() || step.next_state < 0 ||
        step.next_state >= state.states())
      throw std::invalid_argument("record_trajectory: index out of range");
    if (static_cast<int>(step.constraint_rewards.size()) != state.num_constraints())
      throw std::invalid_argument("record_trajectory: constraint sample count mismatch");
    if (step.reward < 0.0 || step.reward > 1.0)
      throw std::invalid_argument("record_trajectory: sampled reward outside [0,1]");
    state.visit_counts(h, step.state, step.action) += 1;
    state.transition_counts(h, step.state, step.action, step.next_state) += 1;
    state.reward_sums(h, step.state, step.action) += step.reward;
    for (int i = 0; i < state.num_constraints(); ++i)
      state.constraint_sums[i](h, step.state, step.action) += step.constraint_rewards[i];
  }
}

enum class BonusMode { theory, scaled };

struct BonusConfig {
  BonusMode mode = BonusMode::scaled;
  double confidence = 0.1;      // delta
  double scale = 0.08;          // coefficient of n^{-1/2} in scaled mode
  std::int64_t episode_budget = 1;  // K

  void validate() const {
    if (confidence <= 0.0 || confidence >= 1.0)
      throw std::invalid_argument("BonusConfig: delta must lie in (0,1)");
    if (scale <= 0.0) throw std::invalid_argument("BonusConfig: scale must be positive");
    if (episode_budget < 1) throw std::invalid_argument("BonusConfig: episode budget must be >= 1");
  }
};

/// Exploration bonuses per (h, s, a). Optimistic rewards add reward +
/// transition; the entropy surrogate psi adds transition * log(A). In scaled
/// mode the two parts are an internal decomposition of the single combined
/// bonus, and only their sum (and transition * log A) is meaningful.
struct BonusTables {
  Table3 reward;      // b^r
  Table3 transition;  // b^p

  double combined(int h, int s, int a) const { return reward(h, s, a) + transition(h, s, a); }
};

/// Bonus widths from the visit counters. Theory mode uses the Hoeffding /
/// L1-concentration widths (natural logarithm, delta' = delta / 3); scaled
/// mode uses the single coefficient * max(n,1)^{-1/2} width.
inline BonusTables compute_bonuses(const EmpiricalModel& state, const BonusConfig& config) {
  config.validate();
  const int H = state.horizon();
  const int S = state.states();
  const int A = state.actions();
  const int I = state.num_constraints();
  BonusTables out;
  out.reward = Table3(H, S, A);
  out.transition = Table3(H, S, A);
  const double log_a = A > 1 ? std::log(static_cast<double>(A)) : 0.0;
  const double delta_prime = config.confidence / 3.0;
  const double k_budget = static_cast<double>(config.episode_budget);
  const double reward_log =
      std::log(2.0 * S * A * H * (I + 1) * k_budget / delta_prime);
  const double transition_log = std::log(static_cast<double>(S) * A * H * k_budget / delta_prime);
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        double n = static_cast<double>(std::max<std::int64_t>(state.visit_counts(h, s, a), 1));
        if (config.mode == BonusMode::theory) {
          out.reward(h, s, a) = std::sqrt(0.5 * reward_log / n);
          out.transition(h, s, a) = H * std::sqrt((2.0 * S + 2.0 * transition_log) / n);
        } else {
          double b = config.scale / std::sqrt(n);
          double trans = log_a > 0.0 ? b / log_a : 0.0;
          out.transition(h, s, a) = trans;
          out.reward(h, s, a) = b - trans;
        }
      }
  return out;
}

/// Optimistic model for one episode: inflated reward/constraint means, the
/// entropy surrogate, and the empirical transition kernel.
struct OptimisticEstimates {
  Table3 reward_hat;                    // r-hat
  std::vector<Table3> constraint_hat;   // u-hat_i
  Table3 psi_hat;                       // psi-hat; empty for planners that do not use it
  Table4 transition_hat;                // p-hat
  BonusTables bonuses;
};

namespace detail {

inline void fill_means_and_transitions(const EmpiricalModel& state, const BonusTables& bonuses,
                                       OptimisticEstimates& out) {
  const int H = state.horizon();
  const int S = state.states();
  const int A = state.actions();
  const int I = state.num_constraints();
  out.reward_hat = Table3(H, S, A);
  out.constraint_hat.assign(I, Table3(H, S, A));
  out.transition_hat = Table4(H, S, A);
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        std::int64_t n = state.visit_counts(h, s, a);
        double denom = static_cast<double>(std::max<std::int64_t>(n, 1));
        double b = bonuses.combined(h, s, a);
        out.reward_hat(h, s, a) = state.reward_sums(h, s, a) / denom + b;
        for (int i = 0; i < I; ++i)
          out.constraint_hat[i](h, s, a) = state.constraint_sums[i](h, s, a) / denom + b;
        auto p_row = out.transition_hat.row(h, s, a);
        if (n == 0) {
          // p-bar is undefined with no data; the uniform row is the symmetric
          // choice and is dominated by the full-width transition bonus.
          for (int next = 0; next < S; ++next) p_row[next] = 1.0 / S;
        } else {
          auto m_row = state.transition_counts.row(h, s, a);
          for (int next = 0; next < S; ++next)
            p_row[next] = static_cast<double>(m_row[next]) / denom;
        }
      }
  out.bonuses = bonuses;
}

}  // namespace detail

/// Full estimates including the entropy surrogate
///   psi-hat = -log pi_k + b^p log(A),
/// which requires a strictly positive current policy.
inline OptimisticEstimates build_estimates(const EmpiricalModel& state,
                                           const PolicyTable& current_policy,
                                           const BonusTables& bonuses) {
  OptimisticEstimates out;
  detail::fill_means_and_transitions(state, bonuses, out);
  const int A = state.actions();
  const double log_a = A > 1 ? std::log(static_cast<double>(A)) : 0.0;
  out.psi_hat = Table3(state.horizon(), state.states(), A);
  for (int h = 0; h < state.horizon(); ++h)
    for (int s = 0; s < state.states(); ++s)
      for (int a = 0; a < A; ++a) {
        double p = current_policy.probs(h, s, a);
        if (p <= 0.0)
          throw std::domain_error("build_estimates: policy must be strictly positive");
        out.psi_hat(h, s, a) = -std::log(p) + bonuses.transition(h, s, a) * log_a;
      }
  return out;
}

/// Estimates without the entropy surrogate, for planners that never touch
/// psi-hat (the dual algorithms, whose primal policies may be deterministic).
inline OptimisticEstimates build_estimates(const EmpiricalModel& state,
                                           const BonusTables& bonuses) {
  OptimisticEstimates out;
  detail::fill_means_and_transitions(state, bonuses, out);
  return out;
}

/// Truncated policy evaluation output. The caps make the surrogate values
/// bonus-independent: reward-like tables stay below H-h+1 and the psi table
/// below psi + (H-h+1) log A.
struct TruncatedValues {
  Table3 q_z;                        // Q-hat of z-hat = r-hat + lambda.u-hat + tau psi-hat
  std::vector<double> v_u_start;     // V-hat_{u-hat_i, 1}(s_1)
  Table3 q_reward;                   // Q-hat of r-hat
  std::vector<Table3> q_constraint;  // Q-hat of u-hat_i
  Table3 q_psi;                      // Q-hat of psi-hat; empty when psi-hat is absent
};

/// Backward recursion under the optimistic model with per-step caps, then the
/// linear combination Q_z = Q_r + sum_i lambda_i Q_{u_i} + tau Q_psi.
inline TruncatedValues truncated_policy_evaluation(const OptimisticEstimates& estimates,
                                                   const PolicyTable& policy,
                                                   const DualVector& lambda, double tau,
                                                   int initial_state = 0) {
  const int H = estimates.reward_hat.horizon();
  const int S = estimates.reward_hat.states();
  const int A = estimates.reward_hat.actions();
  const int I = static_cast<int>(estimates.constraint_hat.size());
  if (policy.horizon() != H || policy.states() != S || policy.actions() != A)
    throw std::invalid_argument("truncated_policy_evaluation: policy shape mismatch");
  if (lambda.size() != I)
    throw std::invalid_argument("truncated_policy_evaluation: multiplier count mismatch");
  const bool use_psi = tau != 0.0;
  if (use_psi && estimates.psi_hat.empty())
    throw std::invalid_argument("truncated_policy_evaluation: tau > 0 requires psi-hat");
  const double log_a = A > 1 ? std::log(static_cast<double>(A)) : 0.0;

  TruncatedValues out;
  out.q_reward = Table3(H, S, A);
  out.q_constraint.assign(I, Table3(H, S, A));
  out.q_psi = use_psi ? Table3(H, S, A) : Table3();
  out.q_z = Table3(H, S, A);
  out.v_u_start.assign(I, 0.0);

  Table2 v_reward(H + 1, S);
  std::vector<Table2> v_constraint(I, Table2(H + 1, S));
  Table2 v_psi(use_psi ? H + 1 : 0, use_psi ? S : 0);

  for (int h = H - 1; h >= 0; --h) {
    double cap = static_cast<double>(H - h);  // H - h + 1 with one-based steps
    for (int s = 0; s < S; ++s) {
      double vr = 0.0, vp = 0.0;
      std::vector<double> vu(I, 0.0);
      for (int a = 0; a < A; ++a) {
        auto p = estimates.transition_hat.row(h, s, a);
        double future_r = 0.0;
        for (int next = 0; next < S; ++next) future_r += p[next] * v_reward(h + 1, next);
        double qr = std::min(cap, estimates.reward_hat(h, s, a) + future_r);
        out.q_reward(h, s, a) = qr;
        vr += policy.probs(h, s, a) * qr;
        for (int i = 0; i < I; ++i) {
          double future_u = 0.0;
          for (int next = 0; next < S; ++next) future_u += p[next] * v_constraint[i](h + 1, next);
          double qu = std::min(cap, estimates.constraint_hat[i](h, s, a) + future_u);
          out.q_constraint[i](h, s, a) = qu;
          vu[i] += policy.probs(h, s, a) * qu;
        }
        if (use_psi) {
          double future_psi = 0.0;
          for (int next = 0; next < S; ++next) future_psi += p[next] * v_psi(h + 1, next);
          double prob = policy.probs(h, s, a);
          double psi_now = prob > 0.0 ? -std::log(prob) : -std::log(kProbFloor);
          double qpsi = std::min(psi_now + cap * log_a,
                                 estimates.psi_hat(h, s, a) + future_psi);
          out.q_psi(h, s, a) = qpsi;
          vp += prob * qpsi;
        }
      }
      v_reward(h, s) = vr;
      for (int i = 0; i < I; ++i) v_constraint[i](h, s) = vu[i];
      if (use_psi) v_psi(h, s) = vp;
    }
  }

  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        double q = out.q_reward(h, s, a);
        for (int i = 0; i < I; ++i) q += lambda.values[i] * out.q_constraint[i](h, s, a);
        if (use_psi) q += tau * out.q_psi(h, s, a);
        out.q_z(h, s, a) = q;
      }
  if (initial_state < 0 || initial_state >= S)
    throw std::invalid_argument("truncated_policy_evaluation: initial state out of range");
  for (int i = 0; i < I; ++i) out.v_u_start[i] = v_constraint[i](0, initial_state);
  return out;
}

}  // namespace cmdp
