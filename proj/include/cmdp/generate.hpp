#pragma once

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cmdp/csv.hpp"
#include "cmdp/exact.hpp"
#include "cmdp/model.hpp"
#include "cmdp/rng.hpp"

namespace cmdp {

/// Random CMDP recipe: rewards uniform on [0,1], constraint means negatively
/// correlated with the rewards via clip((1 - r) + beta * gaussian), i.i.d.
/// uniform-then-normalize transition rows, thresholds uniform on [0, H]
/// unless a fixed list is given.
struct GeneratorConfig {
  int num_states = 5;
  int num_actions = 5;
  int horizon = 5;
  int num_constraints = 1;
  double noise_scale = 0.1;  // beta
  std::uint64_t seed = 0;
  std::optional<std::vector<double>> fixed_thresholds;

  void validate() const {
    if (num_states < 1 || num_actions < 1 || horizon < 1)
      throw std::invalid_argument("GeneratorConfig: dimensions must be >= 1");
    if (num_constraints < 0)
      throw std::invalid_argument("GeneratorConfig: negative constraint count");
    if (noise_scale < 0.0) throw std::invalid_argument("GeneratorConfig: beta must be >= 0");
    if (fixed_thresholds &&
        static_cast<int>(fixed_thresholds->size()) != num_constraints)
      throw std::invalid_argument("GeneratorConfig: threshold list length mismatch");
  }
};

/// Deterministic given the seed; draw order is fixed (rewards, constraints,
/// transitions, thresholds) so outputs never shift across code paths.
inline CmdpModel generate_cmdp(const GeneratorConfig& config) {
  config.validate();
  Rng rng(substream(config.seed, {0x67656eULL}));
  CmdpModel model;
  model.num_states = config.num_states;
  model.num_actions = config.num_actions;
  model.horizon = config.horizon;
  model.num_constraints = config.num_constraints;
  model.initial_state = 0;
  const int H = config.horizon, S = config.num_states, A = config.num_actions;

  model.reward = Table3(H, S, A);
  for (double& r : model.reward.flat()) r = rng.next_double();

  model.constraints.assign(config.num_constraints, Table3(H, S, A));
  for (int i = 0; i < config.num_constraints; ++i)
    for (std::size_t j = 0; j < model.reward.flat().size(); ++j) {
      double value = (1.0 - model.reward.flat()[j]) + config.noise_scale * rng.next_gaussian();
      model.constraints[i].flat()[j] = std::clamp(value, 0.0, 1.0);
    }

  model.transitions = Table4(H, S, A);
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        auto row = model.transitions.row(h, s, a);
        double sum = 0.0;
        for (int next = 0; next < S; ++next) {
          row[next] = rng.next_double();
          sum += row[next];
        }
        if (sum <= 0.0) {
          for (int next = 0; next < S; ++next) row[next] = 1.0 / S;
        } else {
          for (int next = 0; next < S; ++next) row[next] /= sum;
        }
      }

  model.thresholds.resize(config.num_constraints);
  for (int i = 0; i < config.num_constraints; ++i)
    model.thresholds[i] = config.fixed_thresholds ? (*config.fixed_thresholds)[i]
                                                  : rng.next_uniform(0.0, H);
  model.validate();
  return model;
}

/// Draws models until one is feasible with a Slater gap above the floor;
/// skipped seeds are logged since the uniform threshold draw can produce
/// infeasible instances.
inline CmdpModel generate_feasible_cmdp(GeneratorConfig config, double min_gap,
                                        std::uint64_t* accepted_seed = nullptr,
                                        std::ostream* log = &std::cerr) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    CmdpModel model = generate_cmdp(config);
    double gap = model.num_constraints > 0 ? slater_gap(model).gap
                                           : static_cast<double>(model.horizon);
    if (gap >= min_gap) {
      if (accepted_seed) *accepted_seed = config.seed;
      return model;
    }
    if (log)
      *log << "generate: skipping seed " << config.seed << " (slater gap "
           << format_double(gap) << " < " << format_double(min_gap) << ")\n";
    config.seed += 1;
  }
  throw std::runtime_error("generate_feasible_cmdp: no feasible model in 1000 attempts");
}

}  // namespace cmdp
