#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstring>

#include "cmdp/evaluate.hpp"
#include "cmdp/optimism.hpp"
#include "cmdp/sample.hpp"
#include "fixtures.hpp"

using namespace cmdp;
using Catch::Approx;

namespace {

Trajectory fixed_trajectory() {
  Trajectory t(3);
  t[0] = {0, 1, 1.0, {0.0}, 2};
  t[1] = {2, 0, 0.0, {1.0}, 1};
  t[2] = {1, 1, 1.0, {1.0}, 0};
  return t;
}

// Estimates whose empirical parts equal the true model exactly, with the
// given bonuses on top (the synthetic success event).
OptimisticEstimates exact_estimates_with_bonuses(const CmdpModel& m, const PolicyTable& pi,
                                                 const BonusTables& bonuses) {
  EmpiricalModel empirical =
      EmpiricalModel::empty(m.horizon, m.num_states, m.num_actions, m.num_constraints);
  OptimisticEstimates est = build_estimates(empirical, pi, bonuses);
  for (int h = 0; h < m.horizon; ++h)
    for (int s = 0; s < m.num_states; ++s)
      for (int a = 0; a < m.num_actions; ++a) {
        double b = bonuses.combined(h, s, a);
        est.reward_hat(h, s, a) = m.reward(h, s, a) + b;
        for (int i = 0; i < m.num_constraints; ++i)
          est.constraint_hat[i](h, s, a) = m.constraints[i](h, s, a) + b;
        for (int next = 0; next < m.num_states; ++next)
          est.transition_hat(h, s, a, next) = m.transitions(h, s, a, next);
      }
  return est;
}

BonusTables constant_bonuses(int H, int S, int A, double reward, double transition) {
  BonusTables b;
  b.reward = Table3(H, S, A, reward);
  b.transition = Table3(H, S, A, transition);
  return b;
}

}  // namespace

TEST_CASE("record_trajectory") {
  SECTION("one trajectory increments each visited cell once") {
    EmpiricalModel e = EmpiricalModel::empty(3, 3, 2, 1);
    record_trajectory(e, fixed_trajectory());
    CHECK(e.visit_counts(0, 0, 1) == 1);
    CHECK(e.visit_counts(1, 2, 0) == 1);
    CHECK(e.visit_counts(2, 1, 1) == 1);
    CHECK(e.transition_counts(0, 0, 1, 2) == 1);
    CHECK(e.reward_sums(0, 0, 1) == 1.0);
    CHECK(e.constraint_sums[0](1, 2, 0) == 1.0);
    std::int64_t total = 0;
    for (std::int64_t n : e.visit_counts.flat()) total += n;
    CHECK(total == 3);
  }

  SECTION("recording twice doubles every counter") {
    EmpiricalModel e = EmpiricalModel::empty(3, 3, 2, 1);
    record_trajectory(e, fixed_trajectory());
    record_trajectory(e, fixed_trajectory());
    CHECK(e.visit_counts(0, 0, 1) == 2);
    CHECK(e.transition_counts(2, 1, 1, 0) == 2);
    CHECK(e.reward_sums(2, 1, 1) == 2.0);
  }

  SECTION("transition counts marginalize to visit counts") {
    CmdpModel m = fixtures::random_model(91);
    EmpiricalModel e = EmpiricalModel::empty(3, 3, 2, 1);
    PolicyTable pi = PolicyTable::uniform(3, 3, 2);
    Rng rng(5);
    for (int k = 0; k < 500; ++k) record_trajectory(e, sample_episode(m, pi, rng));
    for (int h = 0; h < 3; ++h)
      for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a) {
          std::int64_t row_sum = 0;
          for (std::int64_t c : e.transition_counts.row(h, s, a)) row_sum += c;
          CHECK(row_sum == e.visit_counts(h, s, a));
        }
  }

  SECTION("out-of-range indices are rejected") {
    EmpiricalModel e = EmpiricalModel::empty(3, 3, 2, 1);
    Trajectory t = fixed_trajectory();
    t[1].action = 5;
    CHECK_THROWS_AS(record_trajectory(e, t), std::invalid_argument);
  }

  SECTION("empirical means approach the truth (law of large numbers)") {
    CmdpModel m = fixtures::random_model(97);
    EmpiricalModel e = EmpiricalModel::empty(3, 3, 2, 1);
    PolicyTable pi = PolicyTable::uniform(3, 3, 2);
    Rng rng(6);
    for (int k = 0; k < 10000; ++k) record_trajectory(e, sample_episode(m, pi, rng));
    for (int h = 0; h < 3; ++h)
      for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a) {
          std::int64_t n = e.visit_counts(h, s, a);
          if (n < 100) continue;
          double mean = e.reward_sums(h, s, a) / static_cast<double>(n);
          double p = m.reward(h, s, a);
          double se = std::sqrt(std::max(p * (1 - p), 1e-6) / static_cast<double>(n));
          CHECK(std::abs(mean - p) <= 3.0 * se + 1e-9);
        }
  }
}

TEST_CASE("compute_bonuses") {
  SECTION("theory-mode closed forms at n = 1") {
    EmpiricalModel e = EmpiricalModel::empty(1, 1, 1, 1);
    e.visit_counts(0, 0, 0) = 1;
    BonusConfig cfg;
    cfg.mode = BonusMode::theory;
    cfg.confidence = 0.3;  // delta' = 0.1
    cfg.episode_budget = 1;
    BonusTables b = compute_bonuses(e, cfg);
    CHECK(b.reward(0, 0, 0) == Approx(std::sqrt(0.5 * std::log(40.0))).margin(1e-12));
    CHECK(b.reward(0, 0, 0) == Approx(1.3581015084886805).margin(1e-10));
    CHECK(b.transition(0, 0, 0) ==
          Approx(std::sqrt(2.0 + 2.0 * std::log(10.0))).margin(1e-12));
    CHECK(b.transition(0, 0, 0) == Approx(2.5700525648727513).margin(1e-10));
  }

  SECTION("unvisited cells use max(n, 1)") {
    EmpiricalModel e = EmpiricalModel::empty(1, 1, 2, 1);
    e.visit_counts(0, 0, 0) = 1;
    BonusConfig cfg;
    cfg.mode = BonusMode::theory;
    cfg.confidence = 0.3;
    BonusTables b = compute_bonuses(e, cfg);
    CHECK(b.reward(0, 0, 1) == Approx(b.reward(0, 0, 0)).margin(1e-12));
  }

  SECTION("scaled mode gives coefficient / sqrt(n)") {
    EmpiricalModel e = EmpiricalModel::empty(1, 1, 1, 1);
    e.visit_counts(0, 0, 0) = 16;
    BonusConfig cfg;
    cfg.mode = BonusMode::scaled;
    cfg.scale = 0.08;
    BonusTables b = compute_bonuses(e, cfg);
    CHECK(b.combined(0, 0, 0) == Approx(0.02).margin(1e-15));
  }
}

TEST_CASE("build_estimates") {
  CmdpModel m = fixtures::random_model(101);
  PolicyTable pi = PolicyTable::uniform(3, 3, 2);

  SECTION("with no data the estimate is pure bonus and p-hat is uniform") {
    EmpiricalModel e = EmpiricalModel::empty(3, 3, 2, 1);
    BonusTables b = constant_bonuses(3, 3, 2, 0.3, 0.2);
    OptimisticEstimates est = build_estimates(e, pi, b);
    CHECK(est.reward_hat(1, 2, 0) == Approx(0.5).margin(1e-12));
    for (int next = 0; next < 3; ++next)
      CHECK(est.transition_hat(0, 0, 1, next) == Approx(1.0 / 3).margin(1e-12));
  }

  SECTION("heavily visited cells approach the truth in scaled mode") {
    EmpiricalModel e = EmpiricalModel::empty(3, 3, 2, 1);
    Rng rng(8);
    for (int k = 0; k < 20000; ++k) record_trajectory(e, sample_episode(m, pi, rng));
    BonusConfig cfg;
    cfg.mode = BonusMode::scaled;
    cfg.scale = 0.08;
    OptimisticEstimates est = build_estimates(e, pi, compute_bonuses(e, cfg));
    for (int h = 0; h < 3; ++h)
      for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a) {
          std::int64_t n = e.visit_counts(h, s, a);
          if (n < 500) continue;
          double bonus = est.bonuses.combined(h, s, a);
          double slack = 3.0 * std::sqrt(0.25 / static_cast<double>(n)) + bonus;
          CHECK(std::abs(est.reward_hat(h, s, a) - m.reward(h, s, a)) <= slack + 1e-9);
        }
  }

  SECTION("psi-hat is exactly -log pi when the transition bonus vanishes") {
    EmpiricalModel e = EmpiricalModel::empty(3, 3, 2, 1);
    Rng rng(9);
    PolicyTable soft = fixtures::random_policy(rng, 3, 3, 2);
    BonusTables b = constant_bonuses(3, 3, 2, 0.1, 0.0);
    OptimisticEstimates est = build_estimates(e, soft, b);
    for (std::size_t j = 0; j < est.psi_hat.flat().size(); ++j)
      CHECK(est.psi_hat.flat()[j] ==
            Approx(-std::log(soft.probs.flat()[j])).margin(1e-12));
  }

  SECTION("a policy with zeros is rejected when psi-hat is requested") {
    EmpiricalModel e = EmpiricalModel::empty(3, 3, 2, 1);
    PolicyTable det = PolicyTable::uniform(3, 3, 2);
    det.probs(0, 0, 0) = 1.0;
    det.probs(0, 0, 1) = 0.0;
    CHECK_THROWS_AS(build_estimates(e, det, constant_bonuses(3, 3, 2, 0.1, 0.1)),
                    std::domain_error);
    OptimisticEstimates est = build_estimates(e, constant_bonuses(3, 3, 2, 0.1, 0.1));
    CHECK(est.psi_hat.empty());
  }
}

TEST_CASE("truncated policy evaluation") {
  SECTION("one-step cap engages on a bonus-inflated reward") {
    EmpiricalModel e = EmpiricalModel::empty(1, 1, 1, 1);
    PolicyTable pi = PolicyTable::uniform(1, 1, 1);
    BonusTables b = constant_bonuses(1, 1, 1, 1.3581015084886805, 0.0);
    OptimisticEstimates est = build_estimates(e, pi, b);
    TruncatedValues values =
        truncated_policy_evaluation(est, pi, DualVector::zeros(1, 6.0), 0.0);
    CHECK(values.q_reward(0, 0, 0) == Approx(1.0).margin(1e-12));
  }

  SECTION("zero bonuses on the exact model reproduce min{cap, true Q}") {
    CmdpModel m = fixtures::random_model(109, 3, 2, 4);
    Rng rng(12);
    PolicyTable pi = fixtures::random_policy(rng, 4, 3, 2);
    OptimisticEstimates est =
        exact_estimates_with_bonuses(m, pi, constant_bonuses(4, 3, 2, 0.0, 0.0));
    TruncatedValues truncated =
        truncated_policy_evaluation(est, pi, DualVector::zeros(1, 6.0), 0.0, m.initial_state);
    ValueTable exact = evaluate_policy(m, pi, m.reward);
    for (int h = 0; h < 4; ++h)
      for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a) {
          double cap = static_cast<double>(4 - h);
          CHECK(truncated.q_reward(h, s, a) ==
                Approx(std::min(cap, exact.q(h, s, a))).margin(1e-9));
        }
  }

  SECTION("lambda = 0 and tau = 0 collapse q_z to the reward table") {
    CmdpModel m = fixtures::random_model(113);
    PolicyTable pi = PolicyTable::uniform(3, 3, 2);
    OptimisticEstimates est =
        exact_estimates_with_bonuses(m, pi, constant_bonuses(3, 3, 2, 0.05, 0.05));
    TruncatedValues values =
        truncated_policy_evaluation(est, pi, DualVector::zeros(1, 6.0), 0.0);
    for (std::size_t j = 0; j < values.q_z.flat().size(); ++j)
      CHECK(values.q_z.flat()[j] == values.q_reward.flat()[j]);
  }

  SECTION("all caps hold exhaustively, including the psi cap") {
    CmdpModel m = fixtures::random_model(127, 3, 3, 4);
    Rng rng(14);
    PolicyTable pi = fixtures::random_policy(rng, 4, 3, 3);
    BonusTables b = constant_bonuses(4, 3, 3, 0.4, 0.6);
    OptimisticEstimates est = exact_estimates_with_bonuses(m, pi, b);
    DualVector lambda = DualVector::zeros(1, 6.0);
    lambda.values[0] = 2.0;
    double tau = 0.05;
    TruncatedValues values = truncated_policy_evaluation(est, pi, lambda, tau);
    double log_a = std::log(3.0);
    for (int h = 0; h < 4; ++h) {
      double cap = static_cast<double>(4 - h);
      for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 3; ++a) {
          CHECK(values.q_reward(h, s, a) >= -1e-12);
          CHECK(values.q_reward(h, s, a) <= cap + 1e-12);
          CHECK(values.q_constraint[0](h, s, a) >= -1e-12);
          CHECK(values.q_constraint[0](h, s, a) <= cap + 1e-12);
          CHECK(values.q_psi(h, s, a) <=
                -std::log(pi.probs(h, s, a)) + cap * log_a + 1e-12);
          double recombined = values.q_reward(h, s, a) +
                              lambda.values[0] * values.q_constraint[0](h, s, a) +
                              tau * values.q_psi(h, s, a);
          CHECK(values.q_z(h, s, a) == Approx(recombined).margin(1e-12));
        }
    }
  }

  SECTION("optimism under the synthetic success event") {
    for (std::uint64_t seed = 131; seed < 151; ++seed) {
      CmdpModel m = fixtures::random_model(seed, 3, 2, 3);
      Rng rng(seed);
      PolicyTable pi = fixtures::random_policy(rng, 3, 3, 2);
      BonusTables b = constant_bonuses(3, 3, 2, 0.1, 0.15);
      OptimisticEstimates est = exact_estimates_with_bonuses(m, pi, b);
      TruncatedValues truncated =
          truncated_policy_evaluation(est, pi, DualVector::zeros(1, 6.0), 0.0);
      ValueTable exact_r = evaluate_policy(m, pi, m.reward);
      ValueTable exact_u = evaluate_policy(m, pi, m.constraints[0]);
      for (int h = 0; h < 3; ++h) {
        double cap = static_cast<double>(3 - h);
        for (int s = 0; s < 3; ++s)
          for (int a = 0; a < 2; ++a) {
            CHECK(truncated.q_reward(h, s, a) >=
                  std::min(cap, exact_r.q(h, s, a)) - 1e-9);
            CHECK(truncated.q_constraint[0](h, s, a) >=
                  std::min(cap, exact_u.q(h, s, a)) - 1e-9);
          }
      }
    }
  }

  SECTION("raising any bonus weakly raises every truncated q") {
    CmdpModel m = fixtures::random_model(157, 3, 2, 3);
    Rng rng(23);
    PolicyTable pi = fixtures::random_policy(rng, 3, 3, 2);
    EmpiricalModel e = EmpiricalModel::empty(3, 3, 2, 1);
    for (int k = 0; k < 50; ++k) record_trajectory(e, sample_episode(m, pi, rng));
    BonusTables base = constant_bonuses(3, 3, 2, 0.2, 0.1);
    TruncatedValues before = truncated_policy_evaluation(
        build_estimates(e, pi, base), pi, DualVector::zeros(1, 6.0), 0.0);
    for (int trial = 0; trial < 10; ++trial) {
      BonusTables bumped = base;
      for (double& x : bumped.reward.flat())
        if (rng.next_bernoulli(0.3)) x += rng.next_uniform(0.0, 0.4);
      TruncatedValues after = truncated_policy_evaluation(
          build_estimates(e, pi, bumped), pi, DualVector::zeros(1, 6.0), 0.0);
      for (std::size_t j = 0; j < before.q_reward.flat().size(); ++j)
        CHECK(after.q_reward.flat()[j] >= before.q_reward.flat()[j] - 1e-12);
    }
  }

  SECTION("identical inputs give bit-identical outputs") {
    CmdpModel m = fixtures::random_model(163);
    Rng rng(29);
    PolicyTable pi = fixtures::random_policy(rng, 3, 3, 2);
    EmpiricalModel e = EmpiricalModel::empty(3, 3, 2, 1);
    for (int k = 0; k < 20; ++k) record_trajectory(e, sample_episode(m, pi, rng));
    BonusConfig cfg;
    cfg.mode = BonusMode::theory;
    cfg.confidence = 0.1;
    cfg.episode_budget = 100;
    DualVector lambda = DualVector::zeros(1, 6.0);
    lambda.values[0] = 0.3;
    auto run = [&]() {
      OptimisticEstimates est = build_estimates(e, pi, compute_bonuses(e, cfg));
      return truncated_policy_evaluation(est, pi, lambda, 0.02);
    };
    TruncatedValues first = run();
    TruncatedValues second = run();
    REQUIRE(first.q_z.flat().size() == second.q_z.flat().size());
    CHECK(std::memcmp(first.q_z.flat().data(), second.q_z.flat().data(),
                      first.q_z.flat().size() * sizeof(double)) == 0);
  }
}
