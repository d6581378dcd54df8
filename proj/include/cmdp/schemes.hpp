#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "cmdp/evaluate.hpp"
#include "cmdp/exact.hpp"
#include "cmdp/model.hpp"

namespace cmdp {

enum class SchemeKind { vanilla_pd, reg_pd, reg_dual };

struct SchemeConfig {
  double step_size = 0.0;       // eta
  double regularization = 0.0;  // tau; 0 only for the vanilla scheme
  double dual_cap = 0.0;        // lambda_max
  std::int64_t iterations = 0;
  SchemeKind kind = SchemeKind::reg_pd;

  void validate() const {
    if (step_size <= 0.0) throw std::invalid_argument("SchemeConfig: step size must be positive");
    if (regularization < 0.0)
      throw std::invalid_argument("SchemeConfig: regularization must be non-negative");
    if (regularization == 0.0 && kind != SchemeKind::vanilla_pd)
      throw std::invalid_argument("SchemeConfig: tau = 0 is only valid for the vanilla scheme");
    if (dual_cap <= 0.0) throw std::invalid_argument("SchemeConfig: dual cap must be positive");
    if (iterations < 0) throw std::invalid_argument("SchemeConfig: negative iteration count");
  }
};

/// Last-iterate diagnostics for one saddle-point iteration.
struct IterateRecord {
  std::int64_t iteration = 0;
  double suboptimality = 0.0;        // [V_r(pi*) - V_r(pi_k)]_+
  std::vector<double> violations;    // [c_i - V_{u_i}(pi_k)]_+ per constraint
  std::optional<PotentialDiagnostics> phi;
  std::vector<double> lambda;
};

/// Exponentiated-gradient row update pi'(a) proportional to pi(a) exp(eta q(a)),
/// done in log space with per-row max subtraction; eta * q can reach ~H*lambda_max
/// and overflow a naive exp. Entries are floored at kProbFloor.
inline PolicyTable exp_gradient_update(const PolicyTable& policy, const Table3& q, double eta) {
  if (!policy.probs.same_shape(q))
    throw std::invalid_argument("exp_gradient_update: shape mismatch");
  PolicyTable next;
  next.probs = Table3(policy.horizon(), policy.states(), policy.actions());
  std::vector<double> logits(policy.actions());
  for (int h = 0; h < policy.horizon(); ++h)
    for (int s = 0; s < policy.states(); ++s) {
      double max_logit = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < policy.actions(); ++a) {
        double p = policy.probs(h, s, a);
        logits[a] = (p > 0.0 ? std::log(p) : std::log(kProbFloor)) + eta * q(h, s, a);
        max_logit = std::max(max_logit, logits[a]);
      }
      double norm = 0.0;
      for (int a = 0; a < policy.actions(); ++a) {
        logits[a] = std::exp(logits[a] - max_logit);
        norm += logits[a];
      }
      for (int a = 0; a < policy.actions(); ++a)
        next.probs(h, s, a) = std::max(logits[a] / norm, kProbFloor);
    }
  return next;
}

/// Dual mirror step lambda' = proj_box(shrink * lambda - eta * (V_u - c)).
inline DualVector dual_descent_step(const CmdpModel& model, const DualVector& lambda,
                                    const std::vector<double>& constraint_values, double eta,
                                    double shrink) {
  DualVector next = lambda;
  for (int i = 0; i < model.num_constraints; ++i)
    next.values[i] =
        shrink * lambda.values[i] - eta * (constraint_values[i] - model.thresholds[i]);
  next.clamp_to_box();
  return next;
}

inline std::vector<double> constraint_start_values(const CmdpModel& model,
                                                   const PolicyTable& policy) {
  std::vector<double> values(model.num_constraints);
  for (int i = 0; i < model.num_constraints; ++i)
    values[i] = policy_value(model, policy, model.constraints[i]);
  return values;
}

/// Vanilla primal-dual step with an exact value oracle:
///   pi' propto pi exp(eta Q_{r + lambda.u}),  lambda' = proj(lambda - eta (V_u - c)).
inline std::pair<PolicyTable, DualVector> vanilla_pd_step(const CmdpModel& model,
                                                          const PolicyTable& policy,
                                                          const DualVector& lambda,
                                                          const SchemeConfig& config) {
  Table3 mixed = model.reward;
  for (int i = 0; i < model.num_constraints; ++i) {
    double li = lambda.values[i];
    if (li == 0.0) continue;
    const Table3& u = model.constraints[i];
    for (std::size_t j = 0; j < mixed.flat().size(); ++j) mixed.flat()[j] += li * u.flat()[j];
  }
  ValueTable values = evaluate_policy(model, policy, mixed);
  PolicyTable next_policy = exp_gradient_update(policy, values.q, config.step_size);
  DualVector next_lambda = dual_descent_step(model, lambda, constraint_start_values(model, policy),
                                             config.step_size, 1.0);
  return {std::move(next_policy), std::move(next_lambda)};
}

/// Regularized primal-dual step: the primal gradient is the exact Q-table of
/// r + lambda.u + tau psi with psi = -log pi, and the dual shrinks by (1 - eta tau).
inline std::pair<PolicyTable, DualVector> reg_pd_step(const CmdpModel& model,
                                                      const PolicyTable& policy,
                                                      const DualVector& lambda,
                                                      const SchemeConfig& config) {
  const double tau = config.regularization;
  Table3 mixed = model.reward;
  for (int i = 0; i < model.num_constraints; ++i) {
    double li = lambda.values[i];
    if (li == 0.0) continue;
    const Table3& u = model.constraints[i];
    for (std::size_t j = 0; j < mixed.flat().size(); ++j) mixed.flat()[j] += li * u.flat()[j];
  }
  if (tau != 0.0)
    for (int h = 0; h < model.horizon; ++h)
      for (int s = 0; s < model.num_states; ++s)
        for (int a = 0; a < model.num_actions; ++a) {
          double p = policy.probs(h, s, a);
          if (p <= 0.0) throw std::domain_error("reg_pd_step: policy must be strictly positive");
          mixed(h, s, a) += tau * -std::log(p);
        }
  ValueTable values = evaluate_policy(model, policy, mixed);
  PolicyTable next_policy = exp_gradient_update(policy, values.q, config.step_size);
  DualVector next_lambda = dual_descent_step(model, lambda, constraint_start_values(model, policy),
                                             config.step_size, 1.0 - config.step_size * tau);
  return {std::move(next_policy), std::move(next_lambda)};
}

/// Entropy-regularized planning by log-sum-exp backups:
///   Q_h(s,a) = r'_h(s,a) + <p, V_{h+1}>,
///   V_h(s)   = tau log sum_a exp(Q_h(s,a)/tau),
///   pi_h(a|s) propto exp(Q_h(s,a)/tau).
/// Returns the exact maximizer of V_{r'}(pi) + tau H(pi); the stored v is the
/// soft (entropy-augmented) value, not the policy average of q.
inline std::pair<PolicyTable, ValueTable> soft_value_iteration(const Table4& transitions,
                                                               const Table3& reward_fn,
                                                               double tau) {
  if (tau <= 0.0) throw std::domain_error("soft_value_iteration: tau must be positive");
  const int H = transitions.horizon();
  const int S = transitions.states();
  const int A = transitions.actions();
  if (reward_fn.horizon() != H || reward_fn.states() != S || reward_fn.actions() != A)
    throw std::invalid_argument("soft_value_iteration: reward table shape mismatch");

  PolicyTable policy;
  policy.probs = Table3(H, S, A);
  ValueTable values;
  values.v = Table2(H, S);
  values.q = Table3(H, S, A);
  values.label = "soft";
  std::vector<double> v_next(S, 0.0);
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      double max_q = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a) {
        double q = reward_fn(h, s, a);
        auto p = transitions.row(h, s, a);
        for (int next = 0; next < S; ++next) q += p[next] * v_next[next];
        values.q(h, s, a) = q;
        max_q = std::max(max_q, q);
      }
      double norm = 0.0;
      for (int a = 0; a < A; ++a) {
        double w = std::exp((values.q(h, s, a) - max_q) / tau);
        policy.probs(h, s, a) = w;
        norm += w;
      }
      for (int a = 0; a < A; ++a)
        policy.probs(h, s, a) = std::max(policy.probs(h, s, a) / norm, kProbFloor);
      values.v(h, s) = max_q + tau * std::log(norm);
    }
    for (int s = 0; s < S; ++s) v_next[s] = values.v(h, s);
  }
  return {std::move(policy), std::move(values)};
}

/// One dual-descent step on the regularized Lagrangian with an exact oracle:
/// the primal argmax comes from soft value iteration on r + lambda.u, then
/// lambda' = proj((1 - eta tau) lambda - eta (V_u(pi) - c)).
inline std::pair<PolicyTable, DualVector> reg_dual_oracle_step(const CmdpModel& model,
                                                               const DualVector& lambda,
                                                               const SchemeConfig& config) {
  Table3 mixed = model.reward;
  for (int i = 0; i < model.num_constraints; ++i) {
    double li = lambda.values[i];
    if (li == 0.0) continue;
    const Table3& u = model.constraints[i];
    for (std::size_t j = 0; j < mixed.flat().size(); ++j) mixed.flat()[j] += li * u.flat()[j];
  }
  auto [policy, values] = soft_value_iteration(model.transitions, mixed, config.regularization);
  DualVector next_lambda =
      dual_descent_step(model, lambda, constraint_start_values(model, policy), config.step_size,
                        1.0 - config.step_size * config.regularization);
  return {std::move(policy), std::move(next_lambda)};
}

/// Optional reference saddle pair for potential diagnostics.
struct SaddleReference {
  PolicyTable policy;
  DualVector lambda;
};

/// Drives a scheme from the uniform policy and lambda = 0, recording the
/// last-iterate suboptimality and violations of each iterate before stepping.
inline std::vector<IterateRecord> run_oracle_scheme(
    const CmdpModel& model, const OptimalSolution& reference, const SchemeConfig& config,
    const std::optional<SaddleReference>& saddle = std::nullopt) {
  config.validate();
  std::vector<IterateRecord> records;
  records.reserve(static_cast<std::size_t>(config.iterations));
  PolicyTable policy = PolicyTable::uniform(model.horizon, model.num_states, model.num_actions);
  DualVector lambda = DualVector::zeros(model.num_constraints, config.dual_cap);

  for (std::int64_t k = 1; k <= config.iterations; ++k) {
    PolicyTable played = policy;
    if (config.kind == SchemeKind::reg_dual) {
      auto [pi, next_lambda] = reg_dual_oracle_step(model, lambda, config);
      played = std::move(pi);
      lambda = std::move(next_lambda);
    } else {
      auto [next_policy, next_lambda] = config.kind == SchemeKind::vanilla_pd
                                            ? vanilla_pd_step(model, policy, lambda, config)
                                            : reg_pd_step(model, policy, lambda, config);
      policy = std::move(next_policy);
      lambda = std::move(next_lambda);
    }

    IterateRecord rec;
    rec.iteration = k;
    rec.suboptimality =
        std::max(0.0, reference.optimal_value - policy_value(model, played, model.reward));
    rec.violations.resize(model.num_constraints);
    std::vector<double> u_values = constraint_start_values(model, played);
    for (int i = 0; i < model.num_constraints; ++i)
      rec.violations[i] = std::max(0.0, model.thresholds[i] - u_values[i]);
    rec.lambda = lambda.values;
    if (saddle) rec.phi = potential_phi(model, saddle->policy, saddle->lambda, played, lambda);
    records.push_back(std::move(rec));
  }
  return records;
}

namespace detail {

inline std::uint64_t fingerprint_bytes(const void* data, std::size_t size, std::uint64_t h) {
  const unsigned char* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;  // FNV-1a
  }
  return h;
}

inline std::uint64_t fingerprint_model(const CmdpModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  int dims[5] = {model.num_states, model.num_actions, model.horizon, model.num_constraints,
                 model.initial_state};
  h = fingerprint_bytes(dims, sizeof(dims), h);
  auto mix_span = [&](std::span<const double> s) {
    h = fingerprint_bytes(s.data(), s.size() * sizeof(double), h);
  };
  mix_span(model.transitions.flat());
  mix_span(model.reward.flat());
  for (const Table3& u : model.constraints) mix_span(u.flat());
  h = fingerprint_bytes(model.thresholds.data(), model.thresholds.size() * sizeof(double), h);
  return h;
}

}  // namespace detail

/// Approximate regularized saddle point (pi*_tau, lambda*_tau), obtained by a
/// long regularized primal-dual reference run with a small step size and
/// memoized per (model, tau, cap). The exact pair has no closed form, so
/// potentials computed against this reference are approximate by nature.
inline SaddleReference reference_saddle_point(const CmdpModel& model, double tau, double dual_cap,
                                              std::int64_t iterations = 1'000'000,
                                              double step_size = 0.01) {
  static std::mutex mutex;
  static std::map<std::tuple<std::uint64_t, double, double, std::int64_t, double>, SaddleReference>
      cache;
  auto key = std::make_tuple(detail::fingerprint_model(model), tau, dual_cap, iterations,
                             step_size);
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }

  SchemeConfig config;
  config.step_size = step_size;
  config.regularization = tau;
  config.dual_cap = dual_cap;
  config.kind = SchemeKind::reg_pd;
  PolicyTable policy = PolicyTable::uniform(model.horizon, model.num_states, model.num_actions);
  DualVector lambda = DualVector::zeros(model.num_constraints, dual_cap);
  for (std::int64_t k = 0; k < iterations; ++k) {
    auto [next_policy, next_lambda] = reg_pd_step(model, policy, lambda, config);
    policy = std::move(next_policy);
    lambda = std::move(next_lambda);
  }
  SaddleReference ref{std::move(policy), std::move(lambda)};
  std::lock_guard<std::mutex> lock(mutex);
  return cache.emplace(std::move(key), std::move(ref)).first->second;
}

}  // namespace cmdp
