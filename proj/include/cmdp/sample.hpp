#pragma once

#include "cmdp/model.hpp"
#include "cmdp/optimism.hpp"
#include "cmdp/rng.hpp"

namespace cmdp {

/// Plays one episode from the initial state: actions from the policy,
/// Bernoulli reward and constraint draws at their true means, categorical
/// transitions.
inline Trajectory sample_episode(const CmdpModel& model, const PolicyTable& policy, Rng& rng) {
  Trajectory trajectory;
  trajectory.reserve(model.horizon);
  int state = model.initial_state;
  for (int h = 0; h < model.horizon; ++h) {
    StepSample step;
    step.state = state;
    step.action = rng.next_categorical(policy.probs.row(h, state));
    step.reward = rng.next_bernoulli(model.reward(h, state, step.action)) ? 1.0 : 0.0;
    step.constraint_rewards.resize(model.num_constraints);
    for (int i = 0; i < model.num_constraints; ++i)
      step.constraint_rewards[i] =
          rng.next_bernoulli(model.constraints[i](h, state, step.action)) ? 1.0 : 0.0;
    step.next_state = rng.next_categorical(model.transitions.row(h, state, step.action));
    trajectory.push_back(std::move(step));
    state = trajectory.back().next_state;
  }
  return trajectory;
}

}  // namespace cmdp
