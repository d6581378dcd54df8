#pragma once

#include <vector>

#include "cmdp/generate.hpp"
#include "cmdp/model.hpp"
#include "cmdp/rng.hpp"

namespace fixtures {

/// The three-armed investment bandit from the minimal example:
/// r = (0.2, 1, 0.6), u = (0.1, 0.9, 0.5), c = 0.5. Its constrained optimum
/// is pure action 2 (1-based) with value 1; the constraint does not bind.
inline cmdp::CmdpModel minimal_bandit() {
  cmdp::CmdpModel m;
  m.num_states = 1;
  m.num_actions = 3;
  m.horizon = 1;
  m.num_constraints = 1;
  m.initial_state = 0;
  m.transitions = cmdp::Table4(1, 1, 3);
  for (int a = 0; a < 3; ++a) m.transitions(0, 0, a, 0) = 1.0;
  m.reward = cmdp::Table3(1, 1, 3);
  m.reward(0, 0, 0) = 0.2;
  m.reward(0, 0, 1) = 1.0;
  m.reward(0, 0, 2) = 0.6;
  m.constraints.assign(1, cmdp::Table3(1, 1, 3));
  m.constraints[0](0, 0, 0) = 0.1;
  m.constraints[0](0, 0, 1) = 0.9;
  m.constraints[0](0, 0, 2) = 0.5;
  m.thresholds = {0.5};
  return m;
}

/// Bandit variant whose reward argmax is unsafe (reward and constraint in
/// genuine conflict): r = (1, 0.2, 0.6), u = (0.1, 0.9, 0.5), c = 0.5.
/// The constrained optimum is 0.6 on a degenerate face, so unregularized
/// primal-dual iterates oscillate around it forever.
inline cmdp::CmdpModel conflicted_bandit() {
  cmdp::CmdpModel m = minimal_bandit();
  m.reward(0, 0, 0) = 1.0;
  m.reward(0, 0, 1) = 0.2;
  return m;
}

/// Single path: one state, one action, deterministic everything.
inline cmdp::CmdpModel single_action_chain(int horizon) {
  cmdp::CmdpModel m;
  m.num_states = 1;
  m.num_actions = 1;
  m.horizon = horizon;
  m.num_constraints = 1;
  m.initial_state = 0;
  m.transitions = cmdp::Table4(horizon, 1, 1);
  for (int h = 0; h < horizon; ++h) m.transitions(h, 0, 0, 0) = 1.0;
  m.reward = cmdp::Table3(horizon, 1, 1, 1.0);
  m.constraints.assign(1, cmdp::Table3(horizon, 1, 1, 1.0));
  m.thresholds = {0.5 * horizon};
  return m;
}

inline cmdp::CmdpModel random_model(std::uint64_t seed, int S = 3, int A = 2, int H = 3,
                                    int I = 1, double beta = 0.1) {
  cmdp::GeneratorConfig cfg;
  cfg.num_states = S;
  cfg.num_actions = A;
  cfg.horizon = H;
  cfg.num_constraints = I;
  cfg.noise_scale = beta;
  cfg.seed = seed;
  return cmdp::generate_cmdp(cfg);
}

/// Random model with the generator's feasibility filter applied (the raw
/// threshold draw can land above anything attainable).
inline cmdp::CmdpModel feasible_model(std::uint64_t seed, int S = 3, int A = 2, int H = 3,
                                      int I = 1, double beta = 0.1) {
  cmdp::GeneratorConfig cfg;
  cfg.num_states = S;
  cfg.num_actions = A;
  cfg.horizon = H;
  cfg.num_constraints = I;
  cfg.noise_scale = beta;
  cfg.seed = seed;
  return cmdp::generate_feasible_cmdp(cfg, 0.05, nullptr, nullptr);
}

/// Random point on the probability simplex (exponential spacings).
inline std::vector<double> random_simplex_point(cmdp::Rng& rng, int dims) {
  std::vector<double> x(dims);
  double sum = 0.0;
  for (int i = 0; i < dims; ++i) {
    x[i] = -std::log(1.0 - rng.next_double());
    sum += x[i];
  }
  for (int i = 0; i < dims; ++i) x[i] /= sum;
  return x;
}

/// Random strictly positive policy.
inline cmdp::PolicyTable random_policy(cmdp::Rng& rng, int H, int S, int A) {
  cmdp::PolicyTable pi;
  pi.probs = cmdp::Table3(H, S, A);
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s) {
      std::vector<double> row = random_simplex_point(rng, A);
      for (int a = 0; a < A; ++a) pi.probs(h, s, a) = row[a];
    }
  return pi;
}

}  // namespace fixtures
