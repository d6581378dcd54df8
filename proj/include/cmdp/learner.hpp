#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include "cmdp/model.hpp"
#include "cmdp/optimism.hpp"
#include "cmdp/sample.hpp"
#include "cmdp/schemes.hpp"

namespace cmdp {

enum class AlgoKind { reg_pd, vanilla_pd, reg_dual, vanilla_dual };

inline const char* algo_name(AlgoKind kind) {
  switch (kind) {
    case AlgoKind::reg_pd: return "reg-pd";
    case AlgoKind::vanilla_pd: return "vanilla-pd";
    case AlgoKind::reg_dual: return "reg-dual";
    case AlgoKind::vanilla_dual: return "vanilla-dual";
  }
  return "?";
}

inline AlgoKind algo_from_name(const std::string& name) {
  if (name == "reg-pd") return AlgoKind::reg_pd;
  if (name == "vanilla-pd") return AlgoKind::vanilla_pd;
  if (name == "reg-dual") return AlgoKind::reg_dual;
  if (name == "vanilla-dual") return AlgoKind::vanilla_dual;
  throw std::invalid_argument("unknown algorithm: " + name);
}

struct LearnerConfig {
  double step_size = 0.1;       // eta
  double regularization = 0.0;  // tau; must be 0 for the vanilla kinds
  double dual_cap = 1.0;        // lambda_max
  AlgoKind kind = AlgoKind::reg_pd;
  BonusConfig bonus;

  void validate() const {
    if (step_size <= 0.0) throw std::invalid_argument("LearnerConfig: step size must be positive");
    bool vanilla = kind == AlgoKind::vanilla_pd || kind == AlgoKind::vanilla_dual;
    if (vanilla ? regularization != 0.0 : regularization <= 0.0)
      throw std::invalid_argument("LearnerConfig: tau inconsistent with the algorithm kind");
    if (dual_cap <= 0.0) throw std::invalid_argument("LearnerConfig: dual cap must be positive");
    bonus.validate();
  }
};

/// Everything an online learner carries between episodes.
struct LearnerState {
  PolicyTable policy;  // pi_k for the pd kinds; last planned policy for the dual kinds
  DualVector lambda;
  EmpiricalModel empirical;
  std::int64_t episode = 1;  // k
  LearnerConfig config;
};

inline LearnerState make_learner(const CmdpModel& model, const LearnerConfig& config) {
  config.validate();
  LearnerState state;
  state.policy = PolicyTable::uniform(model.horizon, model.num_states, model.num_actions);
  state.lambda = DualVector::zeros(model.num_constraints, config.dual_cap);
  state.empirical =
      EmpiricalModel::empty(model.horizon, model.num_states, model.num_actions,
                            model.num_constraints);
  state.config = config;
  return state;
}

struct EpisodeResult {
  PolicyTable played;
  Trajectory trajectory;
};

/// Runs one episode of the chosen online algorithm. The update order matches
/// the primal-dual pseudocode: build the optimistic model, evaluate, update
/// (pi_{k+1}, lambda_{k+1}), then play pi_k and record its trajectory.
inline EpisodeResult learner_episode(LearnerState& state, const CmdpModel& model, Rng& rng) {
  const LearnerConfig& cfg = state.config;
  const double eta = cfg.step_size;
  const double tau = cfg.regularization;
  BonusTables bonuses = compute_bonuses(state.empirical, cfg.bonus);

  EpisodeResult result;
  switch (cfg.kind) {
    case AlgoKind::reg_pd:
    case AlgoKind::vanilla_pd: {
      OptimisticEstimates estimates = build_estimates(state.empirical, state.policy, bonuses);
      TruncatedValues values = truncated_policy_evaluation(estimates, state.policy, state.lambda,
                                                           tau, model.initial_state);
      result.played = state.policy;
      state.policy = exp_gradient_update(state.policy, values.q_z, eta);
      double shrink = cfg.kind == AlgoKind::reg_pd ? 1.0 - eta * tau : 1.0;
      for (int i = 0; i < model.num_constraints; ++i)
        state.lambda.values[i] = shrink * state.lambda.values[i] -
                                 eta * (values.v_u_start[i] - model.thresholds[i]);
      state.lambda.clamp_to_box();
      break;
    }
    case AlgoKind::reg_dual:
    case AlgoKind::vanilla_dual: {
      OptimisticEstimates estimates = build_estimates(state.empirical, bonuses);
      Table3 mixed = estimates.reward_hat;
      for (int i = 0; i < model.num_constraints; ++i) {
        double li = state.lambda.values[i];
        if (li == 0.0) continue;
        for (std::size_t j = 0; j < mixed.flat().size(); ++j)
          mixed.flat()[j] += li * estimates.constraint_hat[i].flat()[j];
      }
      if (cfg.kind == AlgoKind::reg_dual) {
        // The -log pi part of the entropy surrogate is what soft planning
        // maximizes; only its transition bonus enters as extra reward.
        const double log_a =
            model.num_actions > 1 ? std::log(static_cast<double>(model.num_actions)) : 0.0;
        for (int h = 0; h < model.horizon; ++h)
          for (int s = 0; s < model.num_states; ++s)
            for (int a = 0; a < model.num_actions; ++a)
              mixed(h, s, a) += tau * bonuses.transition(h, s, a) * log_a;
        auto [policy, soft_values] = soft_value_iteration(estimates.transition_hat, mixed, tau);
        result.played = std::move(policy);
      } else {
        result.played =
            dp_plan(estimates.transition_hat, mixed, model.initial_state).policy;
      }
      double shrink = cfg.kind == AlgoKind::reg_dual ? 1.0 - eta * tau : 1.0;
      for (int i = 0; i < model.num_constraints; ++i) {
        ValueTable vu =
            evaluate_policy(estimates.transition_hat, result.played, estimates.constraint_hat[i]);
        state.lambda.values[i] = shrink * state.lambda.values[i] -
                                 eta * (vu.v(0, model.initial_state) - model.thresholds[i]);
      }
      state.lambda.clamp_to_box();
      state.policy = result.played;
      break;
    }
  }

  result.trajectory = sample_episode(model, result.played, rng);
  record_trajectory(state.empirical, result.trajectory);
  state.episode += 1;
  return result;
}

/// Hyperparameter schedule of the online regret theorem:
///   tau = K^{-1/7},  eta = Xi K^{-5/7} / (H^2 I),  lambda_max = (H / Xi) K^{1/14}.
inline SchemeConfig theoretical_hyperparams(std::int64_t episodes, int horizon,
                                            int num_constraints, double slater_gap) {
  if (episodes < 1) throw std::invalid_argument("theoretical_hyperparams: K must be >= 1");
  if (slater_gap <= 0.0)
    throw std::domain_error("theoretical_hyperparams: Slater gap must be positive");
  const double k = static_cast<double>(episodes);
  SchemeConfig config;
  config.kind = SchemeKind::reg_pd;
  config.iterations = episodes;
  config.regularization = std::pow(k, -1.0 / 7.0);
  config.step_size =
      slater_gap * std::pow(k, -5.0 / 7.0) / (static_cast<double>(horizon) * horizon *
                                              std::max(num_constraints, 1));
  config.dual_cap = horizon / slater_gap * std::pow(k, 1.0 / 14.0);
  return config;
}

}  // namespace cmdp
