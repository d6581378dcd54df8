// Command-line front end: generate models, solve them exactly, run oracle
// schemes and online learners, sweep hyperparameter grids, and plot CSVs.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmdp/cmdp.hpp"

namespace {

using nlohmann::json;

struct GenerateArgs {
  cmdp::GeneratorConfig config;
  std::vector<double> thresholds;
  double min_gap = 0.05;
  std::string out = "model.json";
};

void run_generate(const GenerateArgs& args) {
  cmdp::GeneratorConfig config = args.config;
  if (!args.thresholds.empty()) config.fixed_thresholds = args.thresholds;
  std::uint64_t used_seed = config.seed;
  cmdp::CmdpModel model =
      args.min_gap > 0.0 ? cmdp::generate_feasible_cmdp(config, args.min_gap, &used_seed)
                         : cmdp::generate_cmdp(config);
  cmdp::save_model(model, args.out);
  double gap = model.num_constraints > 0 ? cmdp::slater_gap(model).gap
                                         : static_cast<double>(model.horizon);
  std::cout << "wrote " << args.out << " (seed " << used_seed << ", slater gap "
            << cmdp::format_double(gap) << ")\n";
}

void run_solve(const std::string& model_path, const std::string& out) {
  cmdp::CmdpModel model = cmdp::load_model(model_path);
  cmdp::OptimalSolution sol = cmdp::solve_cmdp_lp(model);
  cmdp::SlaterCertificate cert = cmdp::slater_gap(model);
  json report;
  report["optimal_value"] = sol.optimal_value;
  report["slater_gap"] = cert.gap;
  if (sol.dual_estimate) report["dual_estimate"] = *sol.dual_estimate;
  json policy = json::array();
  for (int h = 0; h < model.horizon; ++h) {
    json per_state = json::array();
    for (int s = 0; s < model.num_states; ++s) {
      json row = json::array();
      for (int a = 0; a < model.num_actions; ++a) row.push_back(sol.optimal_policy.probs(h, s, a));
      per_state.push_back(std::move(row));
    }
    policy.push_back(std::move(per_state));
  }
  report["optimal_policy"] = std::move(policy);
  std::string text = report.dump(1) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream file(out);
    if (!file) throw std::runtime_error("cannot open " + out);
    file << text;
    std::cout << "wrote " << out << "\n";
  }
}

struct OracleArgs {
  std::string model_path;
  std::string scheme = "reg-pd";
  double eta = 0.05;
  double tau = 0.01;
  double lambda_max = 6.0;
  std::int64_t iterations = 20000;
  bool with_phi = false;
  std::int64_t phi_iterations = 1000000;
  std::string out = "oracle.csv";
};

void run_oracle(const OracleArgs& args) {
  cmdp::CmdpModel model = cmdp::load_model(args.model_path);
  cmdp::OptimalSolution reference = cmdp::solve_cmdp_lp(model);
  cmdp::SchemeConfig config;
  config.step_size = args.eta;
  config.regularization = args.scheme == "vanilla-pd" ? 0.0 : args.tau;
  config.dual_cap = args.lambda_max;
  config.iterations = args.iterations;
  if (args.scheme == "vanilla-pd")
    config.kind = cmdp::SchemeKind::vanilla_pd;
  else if (args.scheme == "reg-pd")
    config.kind = cmdp::SchemeKind::reg_pd;
  else if (args.scheme == "reg-dual")
    config.kind = cmdp::SchemeKind::reg_dual;
  else
    throw std::invalid_argument("unknown scheme: " + args.scheme);

  std::optional<cmdp::SaddleReference> saddle;
  if (args.with_phi)
    saddle = cmdp::reference_saddle_point(model, config.regularization, config.dual_cap,
                                          args.phi_iterations);
  std::vector<cmdp::IterateRecord> records =
      cmdp::run_oracle_scheme(model, reference, config, saddle);
  std::ofstream file(args.out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + args.out);
  file << cmdp::render_oracle_csv(records, args.scheme, args.eta, config.regularization,
                                  args.lambda_max);
  std::cout << "wrote " << args.out << " (" << records.size() << " iterations)\n";
  if (args.with_phi) {
    // The shared schema has no potential columns; diagnostics go to a sidecar.
    std::string phi_path = args.out + ".phi.csv";
    std::ofstream phi_file(phi_path, std::ios::binary);
    if (!phi_file) throw std::runtime_error("cannot open " + phi_path);
    phi_file << "iteration,kl_term,dual_term,phi\n";
    for (const cmdp::IterateRecord& rec : records)
      if (rec.phi)
        phi_file << rec.iteration << ',' << cmdp::format_double(rec.phi->kl_term) << ','
                 << cmdp::format_double(rec.phi->dual_term) << ','
                 << cmdp::format_double(rec.phi->phi) << "\n";
    std::cout << "wrote " << phi_path << "\n";
  }
}

struct LearnArgs {
  std::string model_path;
  std::string algo = "reg-pd";
  double eta = 0.1;
  double tau = 0.01;
  double lambda_max = 6.0;
  std::int64_t episodes = 4000;
  std::uint64_t seed = 123;
  std::string bonus_mode = "scaled";
  double bonus_scale = 0.08;
  double delta = 0.1;
  std::vector<double> epsilons = {0.05, 0.1};
  std::string out = "learn.csv";
};

void run_learn(const LearnArgs& args) {
  cmdp::CmdpModel model = cmdp::load_model(args.model_path);
  cmdp::OptimalSolution reference = cmdp::solve_cmdp_lp(model);
  cmdp::LearnerConfig config;
  config.kind = cmdp::algo_from_name(args.algo);
  bool vanilla =
      config.kind == cmdp::AlgoKind::vanilla_pd || config.kind == cmdp::AlgoKind::vanilla_dual;
  config.step_size = args.eta;
  config.regularization = vanilla ? 0.0 : args.tau;
  config.dual_cap = args.lambda_max;
  config.bonus.mode =
      args.bonus_mode == "theory" ? cmdp::BonusMode::theory : cmdp::BonusMode::scaled;
  config.bonus.scale = args.bonus_scale;
  config.bonus.confidence = args.delta;
  config.bonus.episode_budget = args.episodes;

  cmdp::LearnerState state = cmdp::make_learner(model, config);
  cmdp::Rng rng(cmdp::substream(args.seed, {0x6c6eULL}));
  cmdp::RegretLedger ledger = cmdp::make_ledger(model.num_constraints, args.epsilons);
  for (std::int64_t k = 0; k < args.episodes; ++k) {
    cmdp::EpisodeResult episode = cmdp::learner_episode(state, model, rng);
    cmdp::update_ledger(ledger, reference, model, episode.played);
  }

  std::string csv = cmdp::kCsvHeader;
  csv += '\n';
  for (std::int64_t k = 0; k < ledger.episodes(); ++k) {
    cmdp::CsvRow row;
    row.episode = k + 1;
    row.algo = args.algo;
    row.eta = args.eta;
    row.tau = config.regularization;
    row.lambda_max = args.lambda_max;
    row.run = 0;
    row.subopt = ledger.subopt[k];
    row.violation_max = ledger.violation_max[k];
    row.strong_reg_r = ledger.strong_reg_r[k];
    row.strong_reg_u = ledger.strong_reg_u[k];
    row.weak_reg_r = ledger.weak_reg_r[k];
    row.weak_reg_u = ledger.weak_reg_u[k];
    row.eps_unsafe_count =
        ledger.eps_unsafe.empty() ? 0.0 : static_cast<double>(ledger.eps_unsafe[0][k]);
    cmdp::append_csv_row(csv, row);
  }
  std::ofstream file(args.out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + args.out);
  file << csv;
  std::cout << "wrote " << args.out << " (final strong constraint regret "
            << cmdp::format_double(ledger.strong_reg_u.back()) << ")\n";
}

struct SweepArgs {
  cmdp::ExperimentConfig config;
  std::string model_path;
  std::vector<std::string> algos = {"reg-pd", "vanilla-pd"};
  int gen_states = 5, gen_actions = 5, gen_horizon = 5, gen_constraints = 1;
  double gen_beta = 0.1;
  std::uint64_t gen_seed = 123;
  std::string bonus_mode = "scaled";
  std::string config_file;
};

// The JSON config file overrides any flag with the same name.
void apply_config_file(SweepArgs& args) {
  std::ifstream in(args.config_file);
  if (!in) throw std::runtime_error("cannot open config file " + args.config_file);
  json j;
  in >> j;
  auto get = [&](const char* key, auto& target) {
    if (j.contains(key)) target = j.at(key).get<std::decay_t<decltype(target)>>();
  };
  get("model", args.model_path);
  get("algos", args.algos);
  get("vanilla_etas", args.config.vanilla_etas);
  get("regularized_etas", args.config.regularized_etas);
  get("taus", args.config.taus);
  get("lambda_max", args.config.lambda_cap);
  get("episodes", args.config.episodes);
  get("runs", args.config.runs);
  get("seed", args.config.base_seed);
  get("epsilons", args.config.epsilons);
  get("out_dir", args.config.output_dir);
  get("jobs", args.config.jobs);
  get("min_gap", args.config.min_slater_gap);
  get("bonus_mode", args.bonus_mode);
  get("bonus_scale", args.config.bonus.scale);
  get("delta", args.config.bonus.confidence);
  get("gen_states", args.gen_states);
  get("gen_actions", args.gen_actions);
  get("gen_horizon", args.gen_horizon);
  get("gen_constraints", args.gen_constraints);
  get("gen_beta", args.gen_beta);
  get("gen_seed", args.gen_seed);
}

void run_sweep(SweepArgs& args) {
  if (!args.config_file.empty()) apply_config_file(args);
  cmdp::ExperimentConfig& config = args.config;
  config.algorithms.clear();
  for (const std::string& name : args.algos)
    config.algorithms.push_back(cmdp::algo_from_name(name));
  config.bonus.mode =
      args.bonus_mode == "theory" ? cmdp::BonusMode::theory : cmdp::BonusMode::scaled;
  config.bonus.episode_budget = config.episodes;
  if (!args.model_path.empty()) {
    config.model_file = args.model_path;
    config.generator.reset();
  } else {
    cmdp::GeneratorConfig gen;
    gen.num_states = args.gen_states;
    gen.num_actions = args.gen_actions;
    gen.horizon = args.gen_horizon;
    gen.num_constraints = args.gen_constraints;
    gen.noise_scale = args.gen_beta;
    gen.seed = args.gen_seed;
    config.generator = gen;
    config.model_file.reset();
  }
  cmdp::ExperimentResult result = cmdp::run_experiment(config);
  std::cout << "model seed " << result.model_seed << ", slater gap "
            << cmdp::format_double(result.slater) << ", optimal value "
            << cmdp::format_double(result.reference.optimal_value) << "\n";
  for (const cmdp::CellSummary& row : result.summary)
    if (row.best)
      std::cout << "best " << cmdp::algo_name(row.kind) << ": eta="
                << cmdp::format_double(row.cell.eta)
                << " tau=" << cmdp::format_double(row.cell.tau) << " strong_reg_u="
                << cmdp::format_double(row.final_strong_u) << "\n";
  std::cout << "wrote " << result.files.size() << " files under " << config.output_dir << "\n";
}

struct PlotArgs {
  std::vector<std::string> inputs;
  std::string kind = "strong";
  std::string metric;
  std::string out = "plot.svg";
};

void run_plot(const PlotArgs& args) {
  cmdp::emit_plot(args.inputs, cmdp::plot_kind_from_name(args.kind), args.out, args.metric);
  std::cout << "wrote " << args.out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-horizon constrained MDP toolkit"};
  app.require_subcommand(1);

  GenerateArgs gen_args;
  CLI::App* generate = app.add_subcommand("generate", "Sample a random CMDP model file");
  generate->add_option("--states", gen_args.config.num_states);
  generate->add_option("--actions", gen_args.config.num_actions);
  generate->add_option("--horizon", gen_args.config.horizon);
  generate->add_option("--constraints", gen_args.config.num_constraints);
  generate->add_option("--beta", gen_args.config.noise_scale);
  generate->add_option("--seed", gen_args.config.seed);
  generate->add_option("--threshold", gen_args.thresholds, "Fixed thresholds (repeatable)");
  generate->add_option("--min-gap", gen_args.min_gap,
                       "Resample until the Slater gap reaches this value (0 disables)");
  generate->add_option("--out", gen_args.out);

  std::string solve_model, solve_out;
  CLI::App* solve = app.add_subcommand("solve", "Exact LP solution and Slater gap");
  solve->add_option("--model", solve_model)->required();
  solve->add_option("--out", solve_out, "Write the report to a file instead of stdout");

  OracleArgs oracle_args;
  CLI::App* oracle = app.add_subcommand("oracle", "Run a saddle-point scheme with exact values");
  oracle->add_option("--model", oracle_args.model_path)->required();
  oracle->add_option("--scheme", oracle_args.scheme)
      ->check(CLI::IsMember({"vanilla-pd", "reg-pd", "reg-dual"}));
  oracle->add_option("--eta", oracle_args.eta);
  oracle->add_option("--tau", oracle_args.tau);
  oracle->add_option("--lambda-max", oracle_args.lambda_max);
  oracle->add_option("--iters", oracle_args.iterations);
  oracle->add_flag("--phi", oracle_args.with_phi, "Include potential diagnostics");
  oracle->add_option("--phi-iters", oracle_args.phi_iterations,
                     "Length of the reference run behind --phi");
  oracle->add_option("--out", oracle_args.out);

  LearnArgs learn_args;
  CLI::App* learn = app.add_subcommand("learn", "Run one online learner on a model");
  learn->add_option("--model", learn_args.model_path)->required();
  learn->add_option("--algo", learn_args.algo)
      ->check(CLI::IsMember({"reg-pd", "vanilla-pd", "reg-dual", "vanilla-dual"}));
  learn->add_option("--eta", learn_args.eta);
  learn->add_option("--tau", learn_args.tau);
  learn->add_option("--lambda-max", learn_args.lambda_max);
  learn->add_option("--episodes", learn_args.episodes);
  learn->add_option("--seed", learn_args.seed);
  learn->add_option("--bonus-mode", learn_args.bonus_mode)
      ->check(CLI::IsMember({"theory", "scaled"}));
  learn->add_option("--bonus-scale", learn_args.bonus_scale);
  learn->add_option("--delta", learn_args.delta);
  learn->add_option("--eps", learn_args.epsilons, "Safety thresholds (repeatable)");
  learn->add_option("--out", learn_args.out);

  SweepArgs sweep_args;
  CLI::App* sweep = app.add_subcommand("sweep", "Grid sweep with per-cell runs and summary");
  sweep->add_option("--model", sweep_args.model_path, "Model file (otherwise generate)");
  sweep->add_option("--algos", sweep_args.algos, "Algorithms to sweep (repeatable)");
  sweep->add_option("--vanilla-etas", sweep_args.config.vanilla_etas);
  sweep->add_option("--reg-etas", sweep_args.config.regularized_etas);
  sweep->add_option("--taus", sweep_args.config.taus);
  sweep->add_option("--lambda-max", sweep_args.config.lambda_cap);
  sweep->add_option("--episodes", sweep_args.config.episodes);
  sweep->add_option("--runs", sweep_args.config.runs);
  sweep->add_option("--seed", sweep_args.config.base_seed);
  sweep->add_option("--eps", sweep_args.config.epsilons);
  sweep->add_option("--out-dir", sweep_args.config.output_dir);
  sweep->add_option("--jobs", sweep_args.config.jobs);
  sweep->add_option("--min-gap", sweep_args.config.min_slater_gap);
  sweep->add_option("--bonus-mode", sweep_args.bonus_mode)
      ->check(CLI::IsMember({"theory", "scaled"}));
  sweep->add_option("--bonus-scale", sweep_args.config.bonus.scale);
  sweep->add_option("--delta", sweep_args.config.bonus.confidence);
  sweep->add_option("--gen-states", sweep_args.gen_states);
  sweep->add_option("--gen-actions", sweep_args.gen_actions);
  sweep->add_option("--gen-horizon", sweep_args.gen_horizon);
  sweep->add_option("--gen-constraints", sweep_args.gen_constraints);
  sweep->add_option("--gen-beta", sweep_args.gen_beta);
  sweep->add_option("--gen-seed", sweep_args.gen_seed);
  sweep->add_option("--config", sweep_args.config_file,
                    "JSON config file; its values override the flags");

  PlotArgs plot_args;
  CLI::App* plot = app.add_subcommand("plot", "Render experiment CSVs as an SVG chart");
  plot->add_option("inputs", plot_args.inputs, "CSV files, one series each")->required();
  plot->add_option("--kind", plot_args.kind)->check(CLI::IsMember({"iterates", "strong", "weak"}));
  plot->add_option("--metric", plot_args.metric, "Override the column plotted for the kind");
  plot->add_option("--out", plot_args.out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) run_generate(gen_args);
    if (*solve) run_solve(solve_model, solve_out);
    if (*oracle) run_oracle(oracle_args);
    if (*learn) run_learn(learn_args);
    if (*sweep) run_sweep(sweep_args);
    if (*plot) run_plot(plot_args);
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
