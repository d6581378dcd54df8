#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cmdp/evaluate.hpp"
#include "cmdp/exact.hpp"
#include "cmdp/model.hpp"

namespace cmdp {

/// Per-episode suboptimality and violation records with strong (positive
/// part) and weak (signed) regret aggregates, plus epsilon-unsafe counters.
/// All entries are exact values of the played policy under the true model;
/// sampled returns never enter the regret accounting.
struct RegretLedger {
  std::vector<double> epsilons;

  // Per-episode records.
  std::vector<double> subopt;         // [V*(r) - V_r(pi_k)]_+
  std::vector<double> violation_max;  // max_i [c_i - V_{u_i}(pi_k)]_+

  // Cumulative series, one entry per episode.
  std::vector<double> strong_reg_r;
  std::vector<double> strong_reg_u;  // max_i of per-constraint positive-part sums
  std::vector<double> weak_reg_r;
  std::vector<double> weak_reg_u;    // max_i of per-constraint signed sums
  std::vector<std::vector<std::int64_t>> eps_unsafe;  // [eps index][episode]

  // Per-constraint running sums.
  std::vector<double> positive_sums;
  std::vector<double> signed_sums;
  double signed_subopt_sum = 0.0;
  double positive_subopt_sum = 0.0;

  std::int64_t episodes() const { return static_cast<std::int64_t>(subopt.size()); }
};

inline RegretLedger make_ledger(int num_constraints, std::vector<double> epsilons) {
  RegretLedger ledger;
  ledger.epsilons = std::move(epsilons);
  ledger.positive_sums.assign(std::max(num_constraints, 1), 0.0);
  ledger.signed_sums.assign(std::max(num_constraints, 1), 0.0);
  ledger.eps_unsafe.assign(ledger.epsilons.size(), {});
  return ledger;
}

/// Appends one episode: exact evaluation of the played policy against the LP
/// reference, positive parts into the strong regrets, signed gaps into the
/// weak ones, and the epsilon-unsafe counters.
inline void update_ledger(RegretLedger& ledger, const OptimalSolution& reference,
                          const CmdpModel& model, const PolicyTable& played) {
  double gap = reference.optimal_value - policy_value(model, played, model.reward);
  ledger.signed_subopt_sum += gap;
  ledger.positive_subopt_sum += std::max(0.0, gap);
  ledger.subopt.push_back(std::max(0.0, gap));
  ledger.weak_reg_r.push_back(ledger.signed_subopt_sum);
  ledger.strong_reg_r.push_back(ledger.positive_subopt_sum);

  double max_violation = 0.0;
  double strong_u = 0.0;
  double weak_u = std::numeric_limits<double>::lowest();
  if (model.num_constraints == 0) weak_u = 0.0;
  for (int i = 0; i < model.num_constraints; ++i) {
    double violation =
        model.thresholds[i] - policy_value(model, played, model.constraints[i]);
    ledger.signed_sums[i] += violation;
    ledger.positive_sums[i] += std::max(0.0, violation);
    max_violation = std::max(max_violation, violation);
    strong_u = std::max(strong_u, ledger.positive_sums[i]);
    weak_u = std::max(weak_u, ledger.signed_sums[i]);
  }
  ledger.violation_max.push_back(std::max(0.0, max_violation));
  ledger.strong_reg_u.push_back(strong_u);
  ledger.weak_reg_u.push_back(weak_u);

  for (std::size_t e = 0; e < ledger.epsilons.size(); ++e) {
    std::int64_t prev = ledger.eps_unsafe[e].empty() ? 0 : ledger.eps_unsafe[e].back();
    ledger.eps_unsafe[e].push_back(prev + (max_violation >= ledger.epsilons[e] ? 1 : 0));
  }
}

}  // namespace cmdp
