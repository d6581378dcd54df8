#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cmdp/csv.hpp"
#include "cmdp/exact.hpp"
#include "cmdp/generate.hpp"
#include "cmdp/learner.hpp"
#include "cmdp/ledger.hpp"
#include "cmdp/model_io.hpp"
#include "cmdp/rng.hpp"

namespace cmdp {

/// Sweep description: which algorithms to run over which hyperparameter grid,
/// how many independent runs, and where the outputs go.
struct ExperimentConfig {
  std::optional<std::string> model_file;
  std::optional<GeneratorConfig> generator;
  std::vector<AlgoKind> algorithms = {AlgoKind::reg_pd, AlgoKind::vanilla_pd};
  std::vector<double> vanilla_etas = {0.05, 0.075, 0.1, 0.125, 0.15, 0.2};
  std::vector<double> regularized_etas = {0.05, 0.1, 0.2};
  std::vector<double> taus = {0.01, 0.02};
  double lambda_cap = 6.0;
  BonusConfig bonus;
  std::int64_t episodes = 4000;
  int runs = 5;
  std::uint64_t base_seed = 123;
  std::vector<double> epsilons = {0.05, 0.1};
  std::string output_dir = "out";
  int jobs = 1;
  double min_slater_gap = 0.05;  // regenerate models whose gap falls below this

  void validate() const {
    if (!model_file && !generator)
      throw std::invalid_argument("ExperimentConfig: need a model file or a generator");
    if (algorithms.empty()) throw std::invalid_argument("ExperimentConfig: no algorithms");
    if (episodes < 1) throw std::invalid_argument("ExperimentConfig: episodes must be >= 1");
    if (runs < 1) throw std::invalid_argument("ExperimentConfig: runs must be >= 1");
    if (jobs < 1) throw std::invalid_argument("ExperimentConfig: jobs must be >= 1");
    bonus.validate();
  }

  bool regularized(AlgoKind kind) const {
    return kind == AlgoKind::reg_pd || kind == AlgoKind::reg_dual;
  }
};

/// One hyperparameter cell of the sweep grid.
struct GridCell {
  double eta = 0.0;
  double tau = 0.0;  // 0 for the vanilla kinds
};

inline std::vector<GridCell> grid_cells(const ExperimentConfig& config, AlgoKind kind) {
  std::vector<GridCell> cells;
  if (config.regularized(kind)) {
    for (double eta : config.regularized_etas)
      for (double tau : config.taus) cells.push_back({eta, tau});
  } else {
    for (double eta : config.vanilla_etas) cells.push_back({eta, 0.0});
  }
  return cells;
}

struct RunResult {
  AlgoKind kind = AlgoKind::reg_pd;
  GridCell cell;
  int run = 0;
  RegretLedger ledger;
};

struct CellSummary {
  AlgoKind kind = AlgoKind::reg_pd;
  GridCell cell;
  double final_strong_r = 0.0;
  double final_strong_u = 0.0;
  double final_weak_r = 0.0;
  double final_weak_u = 0.0;
  bool best = false;
};

struct ExperimentResult {
  CmdpModel model;
  std::uint64_t model_seed = 0;  // seed that produced the accepted model
  OptimalSolution reference;
  double slater = 0.0;
  std::vector<RunResult> runs;
  std::vector<CellSummary> summary;
  std::vector<std::string> files;
};

/// Best cell by final strong constraint regret, strong objective regret as
/// tiebreak; exact ties go to the earlier (lexicographically first) cell.
inline std::size_t best_cell_index(const std::vector<CellSummary>& cells) {
  std::size_t best = 0;
  for (std::size_t ci = 1; ci < cells.size(); ++ci) {
    const CellSummary& a = cells[ci];
    const CellSummary& b = cells[best];
    if (a.final_strong_u < b.final_strong_u ||
        (a.final_strong_u == b.final_strong_u && a.final_strong_r < b.final_strong_r))
      best = ci;
  }
  return best;
}

namespace detail {

inline std::string cell_tag(AlgoKind kind, const GridCell& cell) {
  std::string tag = algo_name(kind);
  tag += "_eta";
  tag += format_double(cell.eta);
  if (cell.tau != 0.0) {
    tag += "_tau";
    tag += format_double(cell.tau);
  }
  return tag;
}

inline std::string render_run_csv(const RunResult& result, const ExperimentConfig& config) {
  std::string out = kCsvHeader;
  out += '\n';
  const RegretLedger& ledger = result.ledger;
  for (std::int64_t k = 0; k < ledger.episodes(); ++k) {
    CsvRow row;
    row.episode = k + 1;
    row.algo = algo_name(result.kind);
    row.eta = result.cell.eta;
    row.tau = result.cell.tau;
    row.lambda_max = config.lambda_cap;
    row.run = result.run;
    row.subopt = ledger.subopt[k];
    row.violation_max = ledger.violation_max[k];
    row.strong_reg_r = ledger.strong_reg_r[k];
    row.strong_reg_u = ledger.strong_reg_u[k];
    row.weak_reg_r = ledger.weak_reg_r[k];
    row.weak_reg_u = ledger.weak_reg_u[k];
    row.eps_unsafe_count =
        ledger.eps_unsafe.empty() ? 0.0 : static_cast<double>(ledger.eps_unsafe[0][k]);
    append_csv_row(out, row);
  }
  return out;
}

// Average of the per-run curves for one cell; the run column is -1 to mark
// the aggregate.
inline std::string render_average_csv(const std::vector<const RunResult*>& runs,
                                      const ExperimentConfig& config) {
  std::string out = kCsvHeader;
  out += '\n';
  if (runs.empty()) return out;
  const RunResult& first = *runs.front();
  std::int64_t episodes = first.ledger.episodes();
  double inv = 1.0 / static_cast<double>(runs.size());
  for (std::int64_t k = 0; k < episodes; ++k) {
    CsvRow row;
    row.episode = k + 1;
    row.algo = algo_name(first.kind);
    row.eta = first.cell.eta;
    row.tau = first.cell.tau;
    row.lambda_max = config.lambda_cap;
    row.run = -1;
    for (const RunResult* r : runs) {
      row.subopt += r->ledger.subopt[k] * inv;
      row.violation_max += r->ledger.violation_max[k] * inv;
      row.strong_reg_r += r->ledger.strong_reg_r[k] * inv;
      row.strong_reg_u += r->ledger.strong_reg_u[k] * inv;
      row.weak_reg_r += r->ledger.weak_reg_r[k] * inv;
      row.weak_reg_u += r->ledger.weak_reg_u[k] * inv;
      row.eps_unsafe_count +=
          (r->ledger.eps_unsafe.empty() ? 0.0
                                        : static_cast<double>(r->ledger.eps_unsafe[0][k])) *
          inv;
    }
    append_csv_row(out, row);
  }
  return out;
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  out << contents;
}

}  // namespace detail

/// Serializes an oracle iterate stream into the common CSV schema; regrets
/// are cumulated from the per-iterate records.
inline std::string render_oracle_csv(const std::vector<IterateRecord>& records,
                                     const std::string& scheme_name, double eta, double tau,
                                     double lambda_cap,
                                     const std::vector<double>& epsilons = {0.05, 0.1}) {
  std::string out = kCsvHeader;
  out += '\n';
  double strong_r = 0.0, weak_r = 0.0;
  std::vector<double> positive_sums, signed_sums;
  std::int64_t unsafe = 0;
  double eps0 = epsilons.empty() ? 0.05 : epsilons.front();
  for (const IterateRecord& rec : records) {
    if (positive_sums.empty()) {
      positive_sums.assign(rec.violations.size(), 0.0);
      signed_sums.assign(rec.violations.size(), 0.0);
    }
    CsvRow row;
    row.episode = rec.iteration;
    row.algo = scheme_name;
    row.eta = eta;
    row.tau = tau;
    row.lambda_max = lambda_cap;
    row.run = 0;
    row.subopt = rec.suboptimality;
    strong_r += rec.suboptimality;
    // Oracle records carry positive parts only, so the weak objective series
    // coincides with the strong one here.
    weak_r += rec.suboptimality;
    double max_violation = 0.0;
    for (std::size_t i = 0; i < rec.violations.size(); ++i) {
      positive_sums[i] += rec.violations[i];
      signed_sums[i] += rec.violations[i];
      max_violation = std::max(max_violation, rec.violations[i]);
    }
    row.violation_max = max_violation;
    row.strong_reg_r = strong_r;
    row.weak_reg_r = weak_r;
    row.strong_reg_u = positive_sums.empty()
                           ? 0.0
                           : *std::max_element(positive_sums.begin(), positive_sums.end());
    row.weak_reg_u =
        signed_sums.empty() ? 0.0 : *std::max_element(signed_sums.begin(), signed_sums.end());
    if (max_violation >= eps0) ++unsafe;
    row.eps_unsafe_count = static_cast<double>(unsafe);
    append_csv_row(out, row);
  }
  return out;
}

/// Runs the full sweep: every (algorithm, cell, run) with its own derived
/// seed stream, one CSV per run, an averaged CSV per cell, and a summary that
/// marks each algorithm's best cell by final strong regrets (constraint
/// first, objective as tiebreak, earlier cell on exact ties). Cells and runs
/// execute in parallel up to `jobs`; output bytes do not depend on the
/// parallelism degree.
inline ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  if (config.model_file) {
    result.model = load_model(*config.model_file);
    result.model_seed = 0;
  } else {
    result.model =
        generate_feasible_cmdp(*config.generator, config.min_slater_gap, &result.model_seed);
  }
  result.slater = result.model.num_constraints > 0 ? slater_gap(result.model).gap
                                                   : static_cast<double>(result.model.horizon);
  result.reference = solve_cmdp_lp(result.model);

  struct Job {
    AlgoKind kind;
    GridCell cell;
    int cell_index;
    int run;
    std::size_t algo_index;
  };
  std::vector<Job> jobs;
  for (std::size_t ai = 0; ai < config.algorithms.size(); ++ai) {
    AlgoKind kind = config.algorithms[ai];
    std::vector<GridCell> cells = grid_cells(config, kind);
    for (int ci = 0; ci < static_cast<int>(cells.size()); ++ci)
      for (int run = 0; run < config.runs; ++run)
        jobs.push_back({kind, cells[ci], ci, run, ai});
  }

  result.runs.resize(jobs.size());
  std::atomic<std::size_t> next_job{0};
  auto worker = [&]() {
    while (true) {
      std::size_t index = next_job.fetch_add(1);
      if (index >= jobs.size()) return;
      const Job& job = jobs[index];
      LearnerConfig learner_config;
      learner_config.step_size = job.cell.eta;
      learner_config.regularization = job.cell.tau;
      learner_config.dual_cap = config.lambda_cap;
      learner_config.kind = job.kind;
      learner_config.bonus = config.bonus;
      learner_config.bonus.episode_budget = config.episodes;
      LearnerState state = make_learner(result.model, learner_config);
      Rng rng(substream(config.base_seed,
                        {job.algo_index, static_cast<std::uint64_t>(job.cell_index),
                         static_cast<std::uint64_t>(job.run)}));
      RegretLedger ledger = make_ledger(result.model.num_constraints, config.epsilons);
      for (std::int64_t k = 0; k < config.episodes; ++k) {
        EpisodeResult episode = learner_episode(state, result.model, rng);
        update_ledger(ledger, result.reference, result.model, episode.played);
      }
      result.runs[index] = RunResult{job.kind, job.cell, job.run, std::move(ledger)};
    }
  };
  int thread_count = std::min<int>(config.jobs, static_cast<int>(jobs.size()));
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::filesystem::create_directories(config.output_dir);
  auto path_for = [&](const std::string& name) {
    return (std::filesystem::path(config.output_dir) / name).string();
  };
  for (std::size_t index = 0; index < jobs.size(); ++index) {
    const Job& job = jobs[index];
    std::string name = detail::cell_tag(job.kind, job.cell) + "_run" + std::to_string(job.run) +
                       ".csv";
    detail::write_file(path_for(name), detail::render_run_csv(result.runs[index], config));
    result.files.push_back(path_for(name));
  }

  // Averaged curves and the per-algorithm best-cell summary.
  std::string summary_csv =
      "algo,eta,tau,lambda_max,strong_reg_r,strong_reg_u,weak_reg_r,weak_reg_u,best\n";
  for (std::size_t ai = 0; ai < config.algorithms.size(); ++ai) {
    AlgoKind kind = config.algorithms[ai];
    std::vector<GridCell> cells = grid_cells(config, kind);
    std::vector<CellSummary> cell_rows;
    for (int ci = 0; ci < static_cast<int>(cells.size()); ++ci) {
      std::vector<const RunResult*> cell_runs;
      for (std::size_t index = 0; index < jobs.size(); ++index)
        if (jobs[index].algo_index == ai && jobs[index].cell_index == ci)
          cell_runs.push_back(&result.runs[index]);
      std::string name = detail::cell_tag(kind, cells[ci]) + "_avg.csv";
      detail::write_file(path_for(name), detail::render_average_csv(cell_runs, config));
      result.files.push_back(path_for(name));

      CellSummary summary;
      summary.kind = kind;
      summary.cell = cells[ci];
      double inv = 1.0 / static_cast<double>(cell_runs.size());
      for (const RunResult* r : cell_runs) {
        summary.final_strong_r += r->ledger.strong_reg_r.back() * inv;
        summary.final_strong_u += r->ledger.strong_reg_u.back() * inv;
        summary.final_weak_r += r->ledger.weak_reg_r.back() * inv;
        summary.final_weak_u += r->ledger.weak_reg_u.back() * inv;
      }
      cell_rows.push_back(summary);
    }
    if (!cell_rows.empty()) cell_rows[best_cell_index(cell_rows)].best = true;
    for (const CellSummary& row : cell_rows) {
      summary_csv += algo_name(row.kind);
      summary_csv += ',';
      summary_csv += format_double(row.cell.eta);
      summary_csv += ',';
      summary_csv += format_double(row.cell.tau);
      summary_csv += ',';
      summary_csv += format_double(config.lambda_cap);
      summary_csv += ',';
      summary_csv += format_double(row.final_strong_r);
      summary_csv += ',';
      summary_csv += format_double(row.final_strong_u);
      summary_csv += ',';
      summary_csv += format_double(row.final_weak_r);
      summary_csv += ',';
      summary_csv += format_double(row.final_weak_u);
      summary_csv += ',';
      summary_csv += row.best ? "1" : "0";
      summary_csv += '\n';
      result.summary.push_back(row);
    }
  }
  detail::write_file(path_for("summary.csv"), summary_csv);
  result.files.push_back(path_for("summary.csv"));
  return result;
}

}  // namespace cmdp
