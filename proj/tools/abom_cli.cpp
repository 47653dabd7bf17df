#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <tuple>

#include <CLI11.hpp>

#include "abom/adaptation.hpp"
#include "abom/baselines.hpp"
#include "abom/benchmarks.hpp"
#include "abom/evolution.hpp"
#include "abom/harness.hpp"

namespace fs = std::filesystem;

namespace {

// ABOM_OUTPUT_DIR overrides every output directory the CLI writes to.
std::string output_dir_override() {
  const char* env = std::getenv("ABOM_OUTPUT_DIR");
  return env != nullptr ? std::string(env) : std::string();
}

int cmd_run(const std::string& config_path) {
  abom::ExperimentConfig config = abom::load_experiment(config_path);
  const std::string env_dir = output_dir_override();
  if (!env_dir.empty()) config.output_dir = env_dir;
  if (config.output_dir.empty()) {
    std::cerr << "run: no output directory (set output_dir in the config or ABOM_OUTPUT_DIR)\n";
    return 1;
  }
  const auto records = abom::run_experiment(config);
  std::cout << "wrote " << records.size() << " records to " << config.output_dir << "\n";
  return 0;
}

int cmd_report(const std::string& records_dir, const std::string& reference, double alpha) {
  std::vector<abom::RunRecord> records;
  for (const auto& entry : fs::directory_iterator(records_dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
      records.push_back(abom::record_from_json(ss.str()));
    } catch (const std::exception&) {
      // not a record file (e.g. an experiment config); skip it
    }
  }
  if (records.empty()) {
    std::cerr << "report: no record files in " << records_dir << "\n";
    return 1;
  }
  // stable report order
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.problem, a.algorithm, a.run_index) <
           std::tie(b.problem, b.algorithm, b.run_index);
  });
  const std::string env_dir = output_dir_override();
  const std::string out_dir = env_dir.empty() ? records_dir : env_dir;
  abom::emit_report(records, out_dir, reference, alpha);
  std::cout << "report written to " << out_dir << " (" << records.size() << " records)\n";
  return 0;
}

struct SolveOptions {
  std::string algo = "abom";
  std::string problem = "sphere";
  std::string scenario_path;
  std::size_t dim = 30;
  std::size_t budget = 20000;
  std::size_t population = 20;
  std::uint64_t seed = 1;
  std::string output;
  bool no_crossover = false;
  bool no_mutation = false;
  bool no_adaptation = false;
  bool raw_attention_inputs = false;
};

int cmd_solve(const SolveOptions& opt) {
  abom::Objective objective;
  abom::Vector lower, upper;
  std::string problem_name;

  if (opt.problem == "uav") {
    const abom::UavScenario scenario = opt.scenario_path.empty()
                                           ? abom::default_uav_scenario()
                                           : abom::load_uav_scenario(opt.scenario_path);
    lower = scenario.lower_bounds();
    upper = scenario.upper_bounds();
    objective = [scenario](std::span<const double> x) {
      return abom::uav_path_cost(scenario, x);
    };
    problem_name = "uav_n" + std::to_string(scenario.node_count);
  } else {
    const abom::BenchmarkFunction fn = abom::make_benchmark(opt.problem, opt.dim);
    lower = fn.lower;
    upper = fn.upper;
    objective = [fn](std::span<const double> x) { return abom::evaluate(fn, x); };
    problem_name = opt.problem + "_d" + std::to_string(opt.dim);
  }

  abom::RunResult result;
  abom::RngStream rng(opt.seed, 0);
  if (opt.algo == "abom") {
    abom::OptimizerConfig cfg;
    cfg.population_size = opt.population;
    cfg.lower = lower;
    cfg.upper = upper;
    cfg.budget = opt.budget;
    cfg.seed = opt.seed;
    cfg.ablation.no_crossover = opt.no_crossover;
    cfg.ablation.no_mutation = opt.no_mutation;
    cfg.ablation.no_adaptation = opt.no_adaptation;
    cfg.raw_attention_inputs = opt.raw_attention_inputs;
    result = abom::run_abom(objective, cfg, rng);
  } else {
    abom::BaselineConfig cfg;
    cfg.population_size = opt.population;
    cfg.lower = lower;
    cfg.upper = upper;
    cfg.budget = opt.budget;
    cfg.seed = opt.seed;
    if (opt.algo == "rs") {
      result = abom::run_random_search(objective, cfg, rng);
    } else if (opt.algo == "de") {
      result = abom::run_de(objective, cfg, rng);
    } else if (opt.algo == "pso") {
      result = abom::run_pso(objective, cfg, rng);
    } else {
      std::cerr << "solve: unknown algorithm '" << opt.algo
                << "' (expected abom, rs, de or pso)\n";
      return 1;
    }
  }

  std::printf("problem=%s algorithm=%s seed=%llu evaluations=%zu best=%.17g\n",
              problem_name.c_str(), opt.algo.c_str(),
              static_cast<unsigned long long>(opt.seed), result.evaluations,
              result.best_fitness);

  std::string out_dir = opt.output;
  if (out_dir.empty()) out_dir = output_dir_override();
  if (!out_dir.empty()) {
    abom::RunRecord record;
    record.problem = problem_name;
    record.algorithm = opt.algo;
    record.run_index = 0;
    record.seed = opt.seed;
    record.dimension = lower.size();
    record.budget = opt.budget;
    record.result = std::move(result);
    fs::create_directories(out_dir);
    const fs::path path =
        fs::path(out_dir) / abom::record_filename(problem_name, opt.algo, 0);
    std::ofstream out(path);
    out << abom::record_to_json(record) << '\n';
    std::cout << "record written to " << path.string() << "\n";
  }
  return 0;
}

int cmd_gradcheck(std::size_t instances, std::uint64_t seed, double step, double tolerance) {
  abom::GradCheckConfig cfg;
  cfg.instances = instances;
  cfg.seed = seed;
  cfg.step = step;
  cfg.tolerance = tolerance;
  const abom::GradCheckReport report = abom::run_gradient_check(cfg);
  for (std::size_t i = 0; i < report.per_instance_max.size(); ++i) {
    std::printf("instance %2zu: max relative error %.3e\n", i, report.per_instance_max[i]);
  }
  std::printf("gradcheck: %zu instances, max relative error %.3e, tolerance %.1e, %.2fs -> %s\n",
              report.instances, report.max_rel_error, cfg.tolerance, report.seconds,
              report.pass ? "PASS" : "FAIL");
  return report.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attention-based black-box optimizer and experiment harness"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run a full experiment from a JSON config");
  run->add_option("config", config_path, "Experiment JSON file")->required();

  std::string records_dir;
  std::string reference = "abom";
  double alpha = 0.05;
  auto* report = app.add_subcommand("report", "Aggregate a records directory into CSV/JSON");
  report->add_option("records", records_dir, "Directory with run record JSON files")->required();
  report->add_option("--reference", reference, "Reference algorithm for significance symbols");
  report->add_option("--alpha", alpha, "Significance level");

  SolveOptions solve_opts;
  auto* solve = app.add_subcommand("solve", "Run one algorithm on one problem");
  solve->add_option("--algo", solve_opts.algo, "abom, rs, de or pso");
  solve->add_option("--problem", solve_opts.problem, "Benchmark id or 'uav'");
  solve->add_option("--scenario", solve_opts.scenario_path, "UAV scenario JSON (with --problem uav)");
  solve->add_option("--dim", solve_opts.dim, "Search dimension (benchmarks)");
  solve->add_option("--budget", solve_opts.budget, "Objective evaluation budget");
  solve->add_option("--pop", solve_opts.population, "Population size");
  solve->add_option("--seed", solve_opts.seed, "Run seed");
  solve->add_option("--output", solve_opts.output, "Directory to write the run record");
  solve->add_flag("--no-crossover", solve_opts.no_crossover, "Disable the crossover operator");
  solve->add_flag("--no-mutation", solve_opts.no_mutation, "Disable the mutation operator");
  solve->add_flag("--no-adaptation", solve_opts.no_adaptation, "Freeze operator parameters");
  solve->add_flag("--raw-attention-inputs", solve_opts.raw_attention_inputs,
                  "Feed the selection scores raw instead of z-scored");

  std::size_t gc_instances = 20;
  std::uint64_t gc_seed = abom::GradCheckConfig{}.seed;
  double gc_step = 1e-5;
  double gc_tol = 1e-4;
  auto* gradcheck =
      app.add_subcommand("gradcheck", "Compare analytic gradients against finite differences");
  gradcheck->add_option("--instances", gc_instances, "Number of random instances");
  gradcheck->add_option("--seed", gc_seed, "Base seed");
  gradcheck->add_option("--step", gc_step, "Finite-difference step");
  gradcheck->add_option("--tol", gc_tol, "Relative error tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path);
    if (report->parsed()) return cmd_report(records_dir, reference, alpha);
    if (solve->parsed()) return cmd_solve(solve_opts);
    if (gradcheck->parsed()) return cmd_gradcheck(gc_instances, gc_seed, gc_step, gc_tol);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
