#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cmdp/cmdp.hpp"
#include "fixtures.hpp"

using namespace cmdp;
using Catch::Approx;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

double pearson(std::span<const double> x, std::span<const double> y) {
  REQUIRE(x.size() == y.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

std::filesystem::path temp_dir(const std::string& name) {
  std::filesystem::path dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("generator") {
  SECTION("beta = 0 pins the constraint to 1 - r") {
    GeneratorConfig cfg;
    cfg.num_states = 3;
    cfg.num_actions = 2;
    cfg.horizon = 3;
    cfg.noise_scale = 0.0;
    cfg.seed = 5;
    CmdpModel m = generate_cmdp(cfg);
    for (std::size_t j = 0; j < m.reward.flat().size(); ++j)
      CHECK(m.constraints[0].flat()[j] == Approx(1.0 - m.reward.flat()[j]).margin(1e-15));
  }

  SECTION("default dimensions follow the five-by-five protocol") {
    GeneratorConfig cfg;
    CHECK(cfg.num_states == 5);
    CHECK(cfg.num_actions == 5);
    CHECK(cfg.horizon == 5);
    CHECK(cfg.noise_scale == 0.1);
  }

  SECTION("every seed yields a structurally valid model") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      GeneratorConfig cfg;
      cfg.num_states = 4;
      cfg.num_actions = 3;
      cfg.horizon = 3;
      cfg.seed = seed;
      CHECK_NOTHROW(generate_cmdp(cfg).validate());
    }
  }

  SECTION("rewards and constraints are strongly negatively correlated") {
    for (std::uint64_t seed = 10; seed < 20; ++seed) {
      GeneratorConfig cfg;
      cfg.seed = seed;
      CmdpModel m = generate_cmdp(cfg);
      double corr = pearson(m.reward.flat(), m.constraints[0].flat());
      CHECK(corr <= -0.9);
    }
  }

  SECTION("identical seeds generate identical models") {
    GeneratorConfig cfg;
    cfg.seed = 77;
    CmdpModel a = generate_cmdp(cfg);
    CmdpModel b = generate_cmdp(cfg);
    CHECK(model_to_json(a).dump() == model_to_json(b).dump());
  }
}

TEST_CASE("sample_episode") {
  SECTION("deterministic dynamics fix the visited path") {
    CmdpModel chain = fixtures::single_action_chain(4);
    PolicyTable pi = PolicyTable::uniform(4, 1, 1);
    Rng rng(3);
    Trajectory t = sample_episode(chain, pi, rng);
    REQUIRE(t.size() == 4);
    for (const StepSample& step : t) {
      CHECK(step.state == 0);
      CHECK(step.action == 0);
      CHECK(step.next_state == 0);
      CHECK(step.reward == 1.0);  // mean-1 Bernoulli is degenerate
    }
  }

  SECTION("mean-zero rewards always sample zero") {
    CmdpModel chain = fixtures::single_action_chain(4);
    for (double& r : chain.reward.flat()) r = 0.0;
    PolicyTable pi = PolicyTable::uniform(4, 1, 1);
    Rng rng(4);
    for (const StepSample& step : sample_episode(chain, pi, rng)) CHECK(step.reward == 0.0);
  }

  SECTION("visit frequencies match the occupancy measure") {
    CmdpModel m = fixtures::random_model(191);
    Rng policy_rng(6);
    PolicyTable pi = fixtures::random_policy(policy_rng, 3, 3, 2);
    OccupancyMeasure occ = occupancy_of_policy(m, pi);
    const int episodes = 50000;
    Table3 hits(3, 3, 2);
    Rng rng(substream(191, {0x5a}));
    for (int k = 0; k < episodes; ++k) {
      Trajectory t = sample_episode(m, pi, rng);
      for (int h = 0; h < 3; ++h) hits(h, t[h].state, t[h].action) += 1.0;
    }
    for (int h = 0; h < 3; ++h)
      for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a) {
          double p = occ.d(h, s, a);
          double freq = hits(h, s, a) / episodes;
          double se = std::sqrt(std::max(p * (1 - p), 1e-8) / episodes);
          CHECK(std::abs(freq - p) <= 3.5 * se + 1e-9);
        }
  }
}

TEST_CASE("model file round trip") {
  CmdpModel m = fixtures::random_model(199);
  std::filesystem::path dir = temp_dir("cmdp_io_test");
  std::string path = (dir / "model.json").string();
  save_model(m, path);
  CmdpModel loaded = load_model(path);
  CHECK(model_to_json(m).dump() == model_to_json(loaded).dump());
}

TEST_CASE("run_experiment") {
  SECTION("one cell, one run, one episode emits exactly one data row") {
    ExperimentConfig cfg;
    GeneratorConfig gen;
    gen.num_states = 2;
    gen.num_actions = 2;
    gen.horizon = 2;
    gen.seed = 11;
    cfg.generator = gen;
    cfg.algorithms = {AlgoKind::reg_pd};
    cfg.regularized_etas = {0.1};
    cfg.taus = {0.01};
    cfg.episodes = 1;
    cfg.runs = 1;
    cfg.output_dir = temp_dir("cmdp_exp_single").string();
    cfg.bonus.episode_budget = 1;
    ExperimentResult result = run_experiment(cfg);
    std::string run_csv = slurp(cfg.output_dir + "/reg-pd_eta0.1_tau0.01_run0.csv");
    int lines = 0;
    for (char c : run_csv)
      if (c == '\n') ++lines;
    CHECK(lines == 2);  // header + one data row
    CHECK(run_csv.rfind(kCsvHeader, 0) == 0);
  }

  SECTION("reruns are byte-identical and independent of the job count") {
    auto run_with = [&](const std::string& dir, int jobs) {
      ExperimentConfig cfg;
      GeneratorConfig gen;
      gen.num_states = 3;
      gen.num_actions = 2;
      gen.horizon = 3;
      gen.seed = 21;
      cfg.generator = gen;
      cfg.algorithms = {AlgoKind::reg_pd, AlgoKind::vanilla_pd};
      cfg.regularized_etas = {0.1, 0.2};
      cfg.taus = {0.01};
      cfg.vanilla_etas = {0.1, 0.2};
      cfg.episodes = 40;
      cfg.runs = 2;
      cfg.jobs = jobs;
      cfg.output_dir = temp_dir(dir).string();
      cfg.bonus.episode_budget = cfg.episodes;
      return run_experiment(cfg);
    };
    ExperimentResult a = run_with("cmdp_exp_a", 1);
    ExperimentResult b = run_with("cmdp_exp_b", 4);
    REQUIRE(a.files.size() == b.files.size());
    for (std::size_t i = 0; i < a.files.size(); ++i)
      CHECK(slurp(a.files[i]) == slurp(b.files[i]));
  }
}

TEST_CASE("plot emission") {
  std::filesystem::path dir = temp_dir("cmdp_plot_test");

  SECTION("two-point series makes one polyline with two vertices") {
    std::string csv = kCsvHeader;
    csv += "\n";
    CsvRow row;
    row.algo = "reg-pd";
    row.eta = 0.1;
    row.tau = 0.01;
    row.episode = 1;
    row.strong_reg_u = 0.5;
    append_csv_row(csv, row);
    row.episode = 2;
    row.strong_reg_u = 0.75;
    append_csv_row(csv, row);
    std::string path = (dir / "two.csv").string();
    std::ofstream(path) << csv;
    std::string out = (dir / "two.svg").string();
    emit_plot({path}, PlotKind::strong, out);
    std::string svg = slurp(out);
    std::size_t count = 0, pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
      ++count;
      pos += 1;
    }
    CHECK(count == 1);
    std::size_t points = svg.find("points=\"");
    REQUIRE(points != std::string::npos);
    std::size_t end = svg.find('"', points + 8);
    std::string coords = svg.substr(points + 8, end - points - 8);
    CHECK(std::count(coords.begin(), coords.end(), ',') == 2);
  }

  SECTION("axis ranges are the data extent padded five percent") {
    std::string csv = kCsvHeader;
    csv += "\n";
    CsvRow row;
    row.algo = "reg-pd";
    for (int k = 1; k <= 5; ++k) {
      row.episode = k;
      row.strong_reg_u = 10.0 + 2.0 * k;  // y in [12, 20]
      append_csv_row(csv, row);
    }
    std::string path = (dir / "range.csv").string();
    std::ofstream(path) << csv;
    std::string out = (dir / "range.svg").string();
    emit_plot({path}, PlotKind::strong, out);
    std::string svg = slurp(out);
    std::size_t mark = svg.find("<!-- xrange ");
    REQUIRE(mark != std::string::npos);
    std::istringstream meta(svg.substr(mark + 12));
    double xmin, xmax;
    std::string tag;
    double ymin, ymax;
    meta >> xmin >> xmax >> tag >> ymin >> ymax;
    CHECK(xmin == Approx(1.0 - 0.05 * 4.0).margin(1e-12));
    CHECK(xmax == Approx(5.0 + 0.05 * 4.0).margin(1e-12));
    CHECK(ymin == Approx(12.0 - 0.05 * 8.0).margin(1e-12));
    CHECK(ymax == Approx(20.0 + 0.05 * 8.0).margin(1e-12));

    // The first polyline vertex must map the first data point through the
    // declared affine transform.
    std::size_t points = svg.find("points=\"");
    REQUIRE(points != std::string::npos);
    std::size_t end = svg.find('"', points + 8);
    std::istringstream coords(svg.substr(points + 8, end - points - 8));
    std::string pair;
    coords >> pair;
    auto comma = pair.find(',');
    double px_val = parse_double(pair.substr(0, comma));
    double py_val = parse_double(pair.substr(comma + 1));
    double expected_px = 80.0 + (1.0 - xmin) / (xmax - xmin) * (800.0 - 80.0 - 20.0);
    double expected_py = 20.0 + (500.0 - 20.0 - 55.0) -
                         (12.0 - ymin) / (ymax - ymin) * (500.0 - 20.0 - 55.0);
    CHECK(px_val == Approx(expected_px).margin(1e-9));
    CHECK(py_val == Approx(expected_py).margin(1e-9));
  }

  SECTION("two algorithms give two series") {
    std::string path_a = (dir / "a.csv").string();
    std::string path_b = (dir / "b.csv").string();
    for (auto [path, algo] : {std::pair{path_a, "reg-pd"}, std::pair{path_b, "vanilla-pd"}}) {
      std::string csv = kCsvHeader;
      csv += "\n";
      CsvRow row;
      row.algo = algo;
      for (int k = 1; k <= 3; ++k) {
        row.episode = k;
        row.strong_reg_u = k * 0.1;
        append_csv_row(csv, row);
      }
      std::ofstream(path) << csv;
    }
    std::string out = (dir / "pair.svg").string();
    emit_plot({path_a, path_b}, PlotKind::strong, out);
    std::string svg = slurp(out);
    std::size_t count = 0, pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
      ++count;
      pos += 1;
    }
    CHECK(count == 2);
  }

  SECTION("schema mismatch is a format error") {
    std::string path = (dir / "bad.csv").string();
    std::ofstream(path) << "episode,value\n1,2\n";
    CHECK_THROWS_AS(emit_plot({path}, PlotKind::strong, (dir / "bad.svg").string()),
                    std::runtime_error);
  }
}

TEST_CASE("oracle records serialize with cumulative regret columns") {
  std::vector<IterateRecord> records(3);
  for (int k = 0; k < 3; ++k) {
    records[k].iteration = k + 1;
    records[k].suboptimality = 0.5;
    records[k].violations = {0.1 * (k + 1)};
    records[k].lambda = {0.0};
  }
  std::string csv = render_oracle_csv(records, "reg-pd", 0.05, 0.01, 6.0);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  REQUIRE(line == kCsvHeader);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(lines, line)) rows.push_back(split_csv_line(line));
  REQUIRE(rows.size() == 3);
  CHECK(parse_double(rows[2][8]) == Approx(1.5));   // strong_reg_r = 3 * 0.5
  CHECK(parse_double(rows[2][9]) == Approx(0.6));   // strong_reg_u = 0.1+0.2+0.3
  CHECK(parse_double(rows[0][7]) == Approx(0.1));   // violation_max of record 1
  CHECK(parse_double(rows[2][12]) == Approx(3.0));  // all three exceeded eps = 0.05
}

TEST_CASE("best-cell selection breaks ties toward the first cell") {
  std::vector<CellSummary> cells(3);
  cells[0].cell = {0.05, 0.01};
  cells[1].cell = {0.1, 0.01};
  cells[2].cell = {0.2, 0.01};
  for (CellSummary& c : cells) {
    c.final_strong_u = 5.0;
    c.final_strong_r = 2.0;
  }
  CHECK(best_cell_index(cells) == 0);
  cells[2].final_strong_r = 1.0;  // same strong_u, better strong_r
  CHECK(best_cell_index(cells) == 2);
  cells[1].final_strong_u = 4.0;  // strictly better primary metric wins
  CHECK(best_cell_index(cells) == 1);
}

TEST_CASE("csv formatting round trip") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    double x = std::exp(rng.next_uniform(-20.0, 20.0)) * (rng.next_bernoulli(0.5) ? 1 : -1);
    CHECK(parse_double(format_double(x)) == x);
  }
}
