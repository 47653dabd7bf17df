#include "abom/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <nlohmann/json.hpp>

#include "abom/benchmarks.hpp"

namespace abom {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kAlgorithmIds[] = {"abom", "rs", "de", "pso"};

bool known_algorithm_id(const std::string& id) {
  for (const char* k : kAlgorithmIds) {
    if (id == k) return true;
  }
  return false;
}

std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '-' || c == '_';
    if (!ok) c = '_';
  }
  return out;
}

// Shortest representation that round-trips a double through text.
std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double median_of(Vector values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

json trace_to_json(const Vector& trace) {
  json points = json::array();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (i == 0 || trace[i] != trace[i - 1]) {
      points.push_back(json::array({i, trace[i]}));
    }
  }
  return json{{"length", trace.size()}, {"points", std::move(points)}};
}

Vector trace_from_json(const json& j) {
  const std::size_t length = j.at("length").get<std::size_t>();
  Vector trace(length);
  const auto& points = j.at("points");
  if (length == 0) {
    if (!points.empty()) throw std::invalid_argument("trace: points for empty trace");
    return trace;
  }
  std::size_t prev = 0;
  bool first = true;
  double value = 0.0;
  for (const auto& p : points) {
    const std::size_t idx = p.at(0).get<std::size_t>();
    const double v = p.at(1).get<double>();
    if (first) {
      if (idx != 0) throw std::invalid_argument("trace: first change point must be index 0");
      first = false;
    } else {
      if (idx <= prev || idx >= length) throw std::invalid_argument("trace: bad change point");
      for (std::size_t i = prev + 1; i < idx; ++i) trace[i] = value;
    }
    trace[idx] = v;
    prev = idx;
    value = v;
  }
  if (first) throw std::invalid_argument("trace: no change points");
  for (std::size_t i = prev + 1; i < length; ++i) trace[i] = value;
  return trace;
}

struct ResolvedProblem {
  ProblemSpec spec;
  Objective objective;
  Vector lower;
  Vector upper;
  std::size_t dim = 0;
};

ResolvedProblem resolve_problem(const ProblemSpec& spec) {
  ResolvedProblem rp;
  rp.spec = spec;
  if (!spec.function_id.empty()) {
    const BenchmarkFunction fn = make_benchmark(spec.function_id, spec.dim);
    rp.lower = fn.lower;
    rp.upper = fn.upper;
    rp.dim = fn.dim;
    rp.objective = [fn](std::span<const double> x) { return evaluate(fn, x); };
  } else {
    const UavScenario sc = load_uav_scenario(spec.scenario_path);
    rp.lower = sc.lower_bounds();
    rp.upper = sc.upper_bounds();
    rp.dim = sc.dimension();
    rp.objective = [sc](std::span<const double> x) { return uav_path_cost(sc, x); };
  }
  return rp;
}

RunRecord execute_cell(const ExperimentConfig& config, const ResolvedProblem& problem,
                       const AlgorithmSpec& algo, std::size_t run) {
  RunRecord record;
  record.problem = problem.spec.name;
  record.algorithm = algo.name;
  record.run_index = run;
  record.seed = run_seed(config.base_seed, problem.spec.name, algo.name, run);
  record.dimension = problem.dim;
  record.budget = problem.spec.budget;

  RngStream rng(record.seed, 0);
  if (algo.id == "abom") {
    OptimizerConfig oc;
    oc.population_size = config.population;
    oc.lower = problem.lower;
    oc.upper = problem.upper;
    oc.budget = problem.spec.budget;
    oc.seed = record.seed;
    oc.ablation = algo.ablation;
    oc.raw_attention_inputs = algo.raw_attention_inputs;
    oc.pair_offspring_by_fitness = algo.pair_offspring_by_fitness;
    if (algo.crossover_dropout >= 0.0) oc.crossover_dropout = algo.crossover_dropout;
    if (algo.mutation_dropout >= 0.0) oc.mutation_dropout = algo.mutation_dropout;
    if (algo.learning_rate > 0.0) oc.optimizer.learning_rate = algo.learning_rate;
    record.result = run_abom(problem.objective, oc, rng);
    return record;
  }

  BaselineConfig bc;
  bc.population_size = config.population;
  bc.lower = problem.lower;
  bc.upper = problem.upper;
  bc.budget = problem.spec.budget;
  bc.seed = record.seed;
  if (algo.id == "rs") {
    record.result = run_random_search(problem.objective, bc, rng);
  } else if (algo.id == "de") {
    record.result = run_de(problem.objective, bc, rng);
  } else {
    record.result = run_pso(problem.objective, bc, rng);
  }
  return record;
}

// Reuse a persisted record if it matches the cell we are about to run.
bool try_load_record(const fs::path& path, const RunRecord& expected, RunRecord& out) {
  std::ifstream in(path);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    RunRecord loaded = record_from_json(ss.str());
    if (loaded.problem != expected.problem || loaded.algorithm != expected.algorithm ||
        loaded.run_index != expected.run_index || loaded.seed != expected.seed ||
        loaded.budget != expected.budget) {
      return false;
    }
    out = std::move(loaded);
    return true;
  } catch (const std::exception&) {
    return false;  // unreadable or stale file, recompute
  }
}

void save_record(const fs::path& path, const RunRecord& record) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream outf(tmp);
    if (!outf) throw std::runtime_error("run_experiment: cannot write " + tmp.string());
    outf << record_to_json(record) << '\n';
  }
  fs::rename(tmp, path);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (problems.empty()) throw std::invalid_argument("experiment: no problems");
  if (algorithms.empty()) throw std::invalid_argument("experiment: no algorithms");
  if (runs == 0) throw std::invalid_argument("experiment: runs must be positive");
  if (population < 2) throw std::invalid_argument("experiment: population must be at least 2");
  for (std::size_t i = 0; i < problems.size(); ++i) {
    const ProblemSpec& p = problems[i];
    if (p.name.empty()) throw std::invalid_argument("experiment: problem without a name");
    const bool is_fn = !p.function_id.empty();
    const bool is_scenario = !p.scenario_path.empty();
    if (is_fn == is_scenario) {
      throw std::invalid_argument("experiment: problem '" + p.name +
                                  "' needs exactly one of function or scenario");
    }
    if (is_fn && p.dim == 0) {
      throw std::invalid_argument("experiment: problem '" + p.name + "' needs a dimension");
    }
    if (p.budget == 0) {
      throw std::invalid_argument("experiment: problem '" + p.name + "' needs a budget");
    }
    for (std::size_t k = i + 1; k < problems.size(); ++k) {
      if (problems[k].name == p.name) {
        throw std::invalid_argument("experiment: duplicate problem name '" + p.name + "'");
      }
    }
  }
  for (std::size_t i = 0; i < algorithms.size(); ++i) {
    const AlgorithmSpec& a = algorithms[i];
    if (a.name.empty()) throw std::invalid_argument("experiment: algorithm without a name");
    if (!known_algorithm_id(a.id)) {
      throw std::invalid_argument("experiment: unknown algorithm id '" + a.id +
                                  "' (expected abom, rs, de or pso)");
    }
    if (a.id == "de" && population < 4) {
      throw std::invalid_argument("experiment: de needs population of at least 4");
    }
    for (std::size_t k = i + 1; k < algorithms.size(); ++k) {
      if (algorithms[k].name == a.name) {
        throw std::invalid_argument("experiment: duplicate algorithm name '" + a.name + "'");
      }
    }
  }
}

ExperimentConfig experiment_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("experiment: bad JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    cfg.runs = j.value("runs", cfg.runs);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);
    cfg.population = j.value("population", cfg.population);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.threads = j.value("threads", cfg.threads);
    for (const auto& pj : j.at("problems")) {
      ProblemSpec p;
      p.name = pj.at("name").get<std::string>();
      p.function_id = pj.value("function", "");
      p.dim = pj.value("dim", std::size_t{0});
      p.scenario_path = pj.value("scenario", "");
      p.budget = pj.value("budget", std::size_t{20000});
      cfg.problems.push_back(std::move(p));
    }
    for (const auto& aj : j.at("algorithms")) {
      AlgorithmSpec a;
      a.id = aj.at("id").get<std::string>();
      a.name = aj.value("name", a.id);
      a.ablation.no_crossover = aj.value("no_crossover", false);
      a.ablation.no_mutation = aj.value("no_mutation", false);
      a.ablation.no_adaptation = aj.value("no_adaptation", false);
      a.raw_attention_inputs = aj.value("raw_attention_inputs", false);
      a.pair_offspring_by_fitness = aj.value("pair_offspring_by_fitness", false);
      a.crossover_dropout = aj.value("crossover_dropout", -1.0);
      a.mutation_dropout = aj.value("mutation_dropout", -1.0);
      a.learning_rate = aj.value("learning_rate", -1.0);
      cfg.algorithms.push_back(std::move(a));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("experiment: missing or bad field: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_experiment: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return experiment_from_json(ss.str());
}

std::uint64_t run_seed(std::uint64_t base_seed, const std::string& problem,
                       const std::string& algorithm, std::size_t run_index) {
  // FNV-1a over "problem \x1f algorithm \x1f run"
  std::uint64_t h = 14695981039346656037ULL;
  const auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0x1f;
    h *= 1099511628211ULL;
  };
  mix(problem);
  mix(algorithm);
  mix(std::to_string(run_index));
  return base_seed + h;
}

std::string record_to_json(const RunRecord& record, bool include_timing) {
  json j;
  j["problem"] = record.problem;
  j["algorithm"] = record.algorithm;
  j["run"] = record.run_index;
  j["seed"] = record.seed;
  j["dimension"] = record.dimension;
  j["budget"] = record.budget;
  j["best_fitness"] = record.result.best_fitness;
  j["best"] = record.result.best;
  j["evaluations"] = record.result.evaluations;
  j["generations"] = record.result.generations;
  j["skipped_updates"] = record.result.skipped_updates;
  j["best_so_far"] = trace_to_json(record.result.best_so_far);
  j["adaptation_loss"] = record.result.adaptation_loss;
  if (include_timing) j["elapsed_seconds"] = record.result.elapsed_seconds;
  return j.dump();
}

RunRecord record_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("record: bad JSON: ") + e.what());
  }
  RunRecord r;
  try {
    r.problem = j.at("problem").get<std::string>();
    r.algorithm = j.at("algorithm").get<std::string>();
    r.run_index = j.at("run").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.dimension = j.at("dimension").get<std::size_t>();
    r.budget = j.at("budget").get<std::size_t>();
    r.result.best_fitness = j.at("best_fitness").get<double>();
    r.result.best = j.at("best").get<Vector>();
    r.result.evaluations = j.at("evaluations").get<std::size_t>();
    r.result.generations = j.at("generations").get<std::size_t>();
    r.result.skipped_updates = j.at("skipped_updates").get<std::size_t>();
    r.result.best_so_far = trace_from_json(j.at("best_so_far"));
    r.result.adaptation_loss = j.at("adaptation_loss").get<Vector>();
    r.result.elapsed_seconds = j.value("elapsed_seconds", 0.0);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("record: missing or bad field: ") + e.what());
  }
  return r;
}

std::string record_filename(const std::string& problem, const std::string& algorithm,
                            std::size_t run_index) {
  char run[16];
  std::snprintf(run, sizeof(run), "%03zu", run_index);
  return sanitize(problem) + "__" + sanitize(algorithm) + "__run" + run + ".json";
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::vector<ResolvedProblem> problems;
  problems.reserve(config.problems.size());
  for (const ProblemSpec& p : config.problems) problems.push_back(resolve_problem(p));

  const bool persist = !config.output_dir.empty();
  if (persist) fs::create_directories(config.output_dir);

  struct Job {
    std::size_t problem;
    std::size_t algorithm;
    std::size_t run;
  };
  std::vector<Job> jobs;
  jobs.reserve(problems.size() * config.algorithms.size() * config.runs);
  for (std::size_t p = 0; p < problems.size(); ++p) {
    for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
      for (std::size_t r = 0; r < config.runs; ++r) jobs.push_back({p, a, r});
    }
  }

  std::vector<RunRecord> records;
  records.reserve(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex sink;
  std::exception_ptr failure;

  const auto worker = [&] {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= jobs.size()) return;
      {
        std::lock_guard<std::mutex> lock(sink);
        if (failure) return;
      }
      const Job& job = jobs[idx];
      const ResolvedProblem& problem = problems[job.problem];
      const AlgorithmSpec& algo = config.algorithms[job.algorithm];
      try {
        RunRecord expected;
        expected.problem = problem.spec.name;
        expected.algorithm = algo.name;
        expected.run_index = job.run;
        expected.seed = run_seed(config.base_seed, problem.spec.name, algo.name, job.run);
        expected.budget = problem.spec.budget;

        RunRecord record;
        bool reused = false;
        fs::path path;
        if (persist) {
          path = fs::path(config.output_dir) /
                 record_filename(problem.spec.name, algo.name, job.run);
          reused = try_load_record(path, expected, record);
        }
        if (!reused) {
          record = execute_cell(config, problem, algo, job.run);
          if (persist) save_record(path, record);
        }
        std::lock_guard<std::mutex> lock(sink);
        records.push_back(std::move(record));
      } catch (...) {
        std::lock_guard<std::mutex> lock(sink);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  std::size_t thread_count = config.threads != 0
                                 ? config.threads
                                 : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  thread_count = std::min(thread_count, jobs.size());
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  // deterministic order regardless of completion order
  std::map<std::string, std::size_t> problem_order, algo_order;
  for (std::size_t p = 0; p < config.problems.size(); ++p) {
    problem_order[config.problems[p].name] = p;
  }
  for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
    algo_order[config.algorithms[a].name] = a;
  }
  std::sort(records.begin(), records.end(), [&](const RunRecord& x, const RunRecord& y) {
    const auto kx = std::tuple(problem_order.at(x.problem), algo_order.at(x.algorithm),
                               x.run_index);
    const auto ky = std::tuple(problem_order.at(y.problem), algo_order.at(y.algorithm),
                               y.run_index);
    return kx < ky;
  });
  return records;
}

RankSumResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b,
                                RankSumMode mode) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("wilcoxon_rank_sum: empty sample");
  }
  if (!all_finite(a) || !all_finite(b)) {
    throw std::invalid_argument("wilcoxon_rank_sum: non-finite sample");
  }
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t total = n + m;

  struct Obs {
    double value;
    int origin;
  };
  std::vector<Obs> all;
  all.reserve(total);
  for (double v : a) all.push_back({v, 0});
  for (double v : b) all.push_back({v, 1});
  std::sort(all.begin(), all.end(), [](const Obs& x, const Obs& y) { return x.value < y.value; });

  // midranks and the tie-group sizes
  std::vector<double> ranks(total);
  double tie_sum = 0.0;  // sum of t^3 - t over tie groups
  std::size_t i = 0;
  while (i < total) {
    std::size_t j = i;
    while (j + 1 < total && all[j + 1].value == all[i].value) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[k] = mid;
    const double t = static_cast<double>(j - i + 1);
    tie_sum += t * t * t - t;
    i = j + 1;
  }

  double w = 0.0;
  for (std::size_t k = 0; k < total; ++k) {
    if (all[k].origin == 0) w += ranks[k];
  }
  const double mean_w = static_cast<double>(n) * static_cast<double>(total + 1) / 2.0;

  RankSumResult result;
  result.statistic = w;

  const bool use_exact =
      mode == RankSumMode::kExact || (mode == RankSumMode::kAuto && total <= 16);
  if (use_exact && total > 20) {
    throw std::invalid_argument("wilcoxon_rank_sum: exact enumeration limited to n + m <= 20");
  }
  if (use_exact) {
    // enumerate every n-subset of the midranks
    result.exact = true;
    const double threshold = std::abs(w - mean_w) - 1e-12;
    std::vector<std::size_t> pick(n);
    std::iota(pick.begin(), pick.end(), std::size_t{0});
    std::uint64_t count = 0;
    std::uint64_t total_subsets = 0;
    while (true) {
      double sum = 0.0;
      for (std::size_t idx : pick) sum += ranks[idx];
      total_subsets += 1;
      if (std::abs(sum - mean_w) >= threshold) count += 1;
      // advance combination
      std::size_t pos = n;
      while (pos > 0) {
        --pos;
        if (pick[pos] != pos + total - n) break;
        if (pos == 0) {
          pos = n;  // done
          break;
        }
      }
      if (pos == n) break;
      pick[pos] += 1;
      for (std::size_t q = pos + 1; q < n; ++q) pick[q] = pick[q - 1] + 1;
    }
    result.p_value = static_cast<double>(count) / static_cast<double>(total_subsets);
    return result;
  }

  result.exact = false;
  const double nm = static_cast<double>(n) * static_cast<double>(m);
  const double t_total = static_cast<double>(total);
  double var_w = nm / 12.0 *
                 (t_total + 1.0 - tie_sum / (t_total * (t_total - 1.0)));
  if (var_w <= 0.0) {
    result.p_value = 1.0;  // everything tied
    return result;
  }
  const double z = std::max(0.0, std::abs(w - mean_w) - 0.5) / std::sqrt(var_w);
  result.p_value = std::erfc(z / std::sqrt(2.0));
  return result;
}

std::vector<NormalizedCurve> normalize_costs(const std::vector<RunRecord>& records,
                                             const std::string& problem) {
  std::vector<const RunRecord*> subset;
  for (const RunRecord& r : records) {
    if (r.problem == problem) subset.push_back(&r);
  }
  if (subset.empty()) {
    throw std::invalid_argument("normalize_costs: no records for problem '" + problem + "'");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const RunRecord* r : subset) {
    for (double v : r->result.best_so_far) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double span = hi - lo;

  std::vector<NormalizedCurve> curves;
  std::vector<std::vector<const RunRecord*>> groups;
  for (const RunRecord* r : subset) {
    std::size_t g = 0;
    for (; g < curves.size(); ++g) {
      if (curves[g].algorithm == r->algorithm) break;
    }
    if (g == curves.size()) {
      curves.push_back({r->algorithm, 0, {}, {}});
      groups.emplace_back();
    }
    groups[g].push_back(r);
  }

  for (std::size_t g = 0; g < curves.size(); ++g) {
    const auto& runs = groups[g];
    const std::size_t len = runs.front()->result.best_so_far.size();
    for (const RunRecord* r : runs) {
      if (r->result.best_so_far.size() != len) {
        throw std::invalid_argument("normalize_costs: trace lengths differ for algorithm '" +
                                    curves[g].algorithm + "'");
      }
    }
    NormalizedCurve& c = curves[g];
    c.runs = runs.size();
    c.mean.assign(len, 0.0);
    c.stddev.assign(len, 0.0);
    if (span <= 0.0) continue;  // flat problem normalizes to zero
    const double inv_runs = 1.0 / static_cast<double>(runs.size());
    for (std::size_t idx = 0; idx < len; ++idx) {
      double mean = 0.0;
      for (const RunRecord* r : runs) mean += (r->result.best_so_far[idx] - lo) / span;
      mean *= inv_runs;
      double var = 0.0;
      for (const RunRecord* r : runs) {
        const double dvi = (r->result.best_so_far[idx] - lo) / span - mean;
        var += dvi * dvi;
      }
      c.mean[idx] = mean;
      c.stddev[idx] = std::sqrt(var * inv_runs);
    }
  }
  return curves;
}

StatsReport build_stats_report(const std::vector<RunRecord>& records,
                               const std::string& reference, double alpha) {
  if (records.empty()) throw std::invalid_argument("build_stats_report: no records");
  StatsReport report;
  report.alpha = alpha;

  std::vector<std::string> problem_names;
  for (const RunRecord& r : records) {
    if (std::find(problem_names.begin(), problem_names.end(), r.problem) ==
        problem_names.end()) {
      problem_names.push_back(r.problem);
    }
  }

  for (const std::string& problem : problem_names) {
    ProblemReport pr;
    pr.problem = problem;

    std::vector<std::string> algo_names;
    std::vector<Vector> finals;
    for (const RunRecord& r : records) {
      if (r.problem != problem) continue;
      std::size_t g = 0;
      for (; g < algo_names.size(); ++g) {
        if (algo_names[g] == r.algorithm) break;
      }
      if (g == algo_names.size()) {
        algo_names.push_back(r.algorithm);
        finals.emplace_back();
      }
      finals[g].push_back(r.result.best_fitness);
    }

    std::size_t ref_idx = 0;
    for (std::size_t g = 0; g < algo_names.size(); ++g) {
      if (algo_names[g] == reference) {
        ref_idx = g;
        break;
      }
    }
    if (report.reference.empty()) report.reference = algo_names[ref_idx];

    const double ref_median = median_of(finals[ref_idx]);
    for (std::size_t g = 0; g < algo_names.size(); ++g) {
      AlgorithmSummary s;
      s.algorithm = algo_names[g];
      s.runs = finals[g].size();
      const Vector& v = finals[g];
      s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      double var = 0.0;
      for (double x : v) var += (x - s.mean) * (x - s.mean);
      s.stddev = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
      s.best = *std::min_element(v.begin(), v.end());
      s.worst = *std::max_element(v.begin(), v.end());
      s.median = median_of(v);
      if (g == ref_idx) {
        s.p_value = -1.0;
        s.symbol = "ref";
      } else {
        const RankSumResult rs = wilcoxon_rank_sum(finals[ref_idx], v);
        s.p_value = rs.p_value;
        if (rs.p_value < alpha && s.median < ref_median) {
          s.symbol = "+";
        } else if (rs.p_value < alpha && s.median > ref_median) {
          s.symbol = "-";
        } else {
          s.symbol = "~";
        }
      }
      pr.algorithms.push_back(std::move(s));
    }
    pr.curves = normalize_costs(records, problem);
    report.problems.push_back(std::move(pr));
  }
  return report;
}

void emit_report(const std::vector<RunRecord>& records, const std::string& out_dir,
                 const std::string& reference, double alpha) {
  if (records.empty()) throw std::invalid_argument("emit_report: no records");
  fs::create_directories(out_dir);

  {
    std::ofstream traces(fs::path(out_dir) / "traces.csv");
    if (!traces) throw std::runtime_error("emit_report: cannot write traces.csv");
    traces << "problem,algorithm,run,evaluation,best_fitness\n";
    for (const RunRecord& r : records) {
      const Vector& trace = r.result.best_so_far;
      for (std::size_t i = 0; i < trace.size(); ++i) {
        traces << r.problem << ',' << r.algorithm << ',' << r.run_index << ',' << i + 1 << ','
               << format_double(trace[i]) << '\n';
      }
    }
  }

  const StatsReport report = build_stats_report(records, reference, alpha);

  {
    json problems = json::object();
    for (const ProblemReport& pr : report.problems) {
      json algos = json::object();
      for (const AlgorithmSummary& s : pr.algorithms) {
        json js = {{"runs", s.runs},     {"mean", s.mean},     {"stddev", s.stddev},
                   {"best", s.best},     {"worst", s.worst},   {"median", s.median},
                   {"symbol", s.symbol}};
        if (s.symbol == "ref") {
          js["p_value"] = nullptr;
        } else {
          js["p_value"] = s.p_value;
        }
        algos[s.algorithm] = std::move(js);
      }
      problems[pr.problem] = json{{"algorithms", std::move(algos)}};
    }
    const json summary = {
        {"reference", report.reference}, {"alpha", report.alpha}, {"problems", problems}};
    std::ofstream out(fs::path(out_dir) / "summary.json");
    if (!out) throw std::runtime_error("emit_report: cannot write summary.json");
    out << summary.dump(2) << '\n';
  }

  {
    std::ofstream curves(fs::path(out_dir) / "curves.csv");
    if (!curves) throw std::runtime_error("emit_report: cannot write curves.csv");
    curves << "problem,algorithm,evaluation,mean_normalized,std_normalized\n";
    constexpr std::size_t kMaxPoints = 500;
    for (const ProblemReport& pr : report.problems) {
      for (const NormalizedCurve& c : pr.curves) {
        const std::size_t len = c.mean.size();
        if (len == 0) continue;
        const std::size_t stride = (len + kMaxPoints - 1) / kMaxPoints;
        for (std::size_t i = 0; i < len; i += stride) {
          curves << pr.problem << ',' << c.algorithm << ',' << i + 1 << ','
                 << format_double(c.mean[i]) << ',' << format_double(c.stddev[i]) << '\n';
        }
        if ((len - 1) % stride != 0) {
          curves << pr.problem << ',' << c.algorithm << ',' << len << ','
                 << format_double(c.mean[len - 1]) << ',' << format_double(c.stddev[len - 1])
                 << '\n';
        }
      }
    }
  }
}

}  // namespace abom
