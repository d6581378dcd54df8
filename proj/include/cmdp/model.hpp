#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmdp/grid.hpp"

namespace cmdp {

inline constexpr double kSimplexTol = 1e-9;
inline constexpr double kProbFloor = 1e-300;

/// Finite-horizon tabular CMDP: transitions p_h(s'|s,a), reward means
/// r_h(s,a) in [0,1], I constraint reward means u_{i,h}(s,a) in [0,1] with
/// thresholds c_i in [0,H], and a single initial state.
struct CmdpModel {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  int num_constraints = 0;
  int initial_state = 0;
  Table4 transitions;               // p[h][s][a][s']
  Table3 reward;                    // r[h][s][a]
  std::vector<Table3> constraints;  // u[i][h][s][a]
  std::vector<double> thresholds;   // c[i]

  /// Throws std::invalid_argument on any structural violation.
  void validate() const {
    if (num_states < 1 || num_actions < 1 || horizon < 1)
      throw std::invalid_argument("CmdpModel: dimensions must be positive");
    if (num_constraints < 0) throw std::invalid_argument("CmdpModel: negative constraint count");
    if (initial_state < 0 || initial_state >= num_states)
      throw std::invalid_argument("CmdpModel: initial state out of range");
    if (transitions.horizon() != horizon || transitions.states() != num_states ||
        transitions.actions() != num_actions)
      throw std::invalid_argument("CmdpModel: transition table shape mismatch");
    if (reward.horizon() != horizon || reward.states() != num_states ||
        reward.actions() != num_actions)
      throw std::invalid_argument("CmdpModel: reward table shape mismatch");
    if (static_cast<int>(constraints.size()) != num_constraints ||
        static_cast<int>(thresholds.size()) != num_constraints)
      throw std::invalid_argument("CmdpModel: constraint count mismatch");
    for (int h = 0; h < horizon; ++h)
      for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < num_actions; ++a) {
          double sum = 0.0;
          for (double p : transitions.row(h, s, a)) {
            if (p < 0.0) throw std::invalid_argument("CmdpModel: negative transition probability");
            sum += p;
          }
          if (std::abs(sum - 1.0) > kSimplexTol)
            throw std::invalid_argument("CmdpModel: transition row does not sum to 1");
          double r = reward(h, s, a);
          if (r < 0.0 || r > 1.0) throw std::invalid_argument("CmdpModel: reward outside [0,1]");
        }
    for (int i = 0; i < num_constraints; ++i) {
      const Table3& u = constraints[i];
      if (u.horizon() != horizon || u.states() != num_states || u.actions() != num_actions)
        throw std::invalid_argument("CmdpModel: constraint table shape mismatch");
      for (double v : u.flat())
        if (v < 0.0 || v > 1.0)
          throw std::invalid_argument("CmdpModel: constraint mean outside [0,1]");
      if (thresholds[i] < 0.0 || thresholds[i] > static_cast<double>(horizon))
        throw std::invalid_argument("CmdpModel: threshold outside [0,H]");
    }
  }
};

/// Non-stationary stochastic policy pi_h(a|s); each (h, s) row lies on the
/// probability simplex.
struct PolicyTable {
  Table3 probs;

  static PolicyTable uniform(int horizon, int states, int actions) {
    PolicyTable pi;
    pi.probs = Table3(horizon, states, actions, 1.0 / actions);
    return pi;
  }

  int horizon() const { return probs.horizon(); }
  int states() const { return probs.states(); }
  int actions() const { return probs.actions(); }

  void validate(bool strictly_positive = false) const {
    for (int h = 0; h < probs.horizon(); ++h)
      for (int s = 0; s < probs.states(); ++s) {
        double sum = 0.0;
        for (double p : probs.row(h, s)) {
          if (p < 0.0) throw std::invalid_argument("PolicyTable: negative probability");
          if (strictly_positive && p < kProbFloor)
            throw std::invalid_argument("PolicyTable: entry below positivity floor");
          sum += p;
        }
        if (std::abs(sum - 1.0) > kSimplexTol)
          throw std::invalid_argument("PolicyTable: row does not sum to 1");
      }
  }
};

/// Backward-induction values; v is the policy average of q unless the table
/// came out of a soft (entropy-augmented) backup, see the label tag.
struct ValueTable {
  Table2 v;  // v[h][s]
  Table3 q;  // q[h][s][a]
  std::string label;
};

/// Probability mass d_h(s,a) of visiting (s, a) at step h.
struct OccupancyMeasure {
  Table3 d;
};

/// Lagrange multipliers confined to the box [0, cap]^I.
struct DualVector {
  std::vector<double> values;
  double cap = 0.0;

  static DualVector zeros(int count, double cap) {
    DualVector lambda;
    lambda.values.assign(count, 0.0);
    lambda.cap = cap;
    return lambda;
  }

  int size() const { return static_cast<int>(values.size()); }

  void clamp_to_box() {
    for (double& v : values) {
      if (v < 0.0) v = 0.0;
      if (v > cap) v = cap;
    }
  }

  void validate() const {
    if (cap <= 0.0) throw std::invalid_argument("DualVector: cap must be positive");
    for (double v : values)
      if (v < 0.0 || v > cap) throw std::invalid_argument("DualVector: entry outside [0, cap]");
  }
};

}  // namespace cmdp
