#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "abom/baselines.hpp"
#include "abom/evolution.hpp"
#include "abom/matrix.hpp"

namespace abom {

// One optimization target. Either a named benchmark function at a given
// dimension, or a UAV scenario loaded from a JSON file.
struct ProblemSpec {
  std::string name;          // unique label used in records and reports
  std::string function_id;   // one of benchmark_ids(), empty for scenarios
  std::size_t dim = 0;
  std::string scenario_path; // UAV scenario JSON, empty for benchmarks
  std::size_t budget = 20000;
};

struct AlgorithmSpec {
  std::string name;  // unique label
  std::string id;    // "abom", "rs", "de" or "pso"
  AblationFlags ablation;
  bool raw_attention_inputs = false;
  bool pair_offspring_by_fitness = false;
  // negative / zero values mean "keep the defaults"
  double crossover_dropout = -1.0;
  double mutation_dropout = -1.0;
  double learning_rate = -1.0;
};

struct ExperimentConfig {
  std::vector<ProblemSpec> problems;
  std::vector<AlgorithmSpec> algorithms;
  std::size_t runs = 30;
  std::uint64_t base_seed = 1;
  std::size_t population = 20;
  std::string output_dir;     // empty: keep records in memory only
  std::size_t threads = 0;    // 0: hardware concurrency

  void validate() const;
};

ExperimentConfig experiment_from_json(const std::string& text);
ExperimentConfig load_experiment(const std::string& path);

struct RunRecord {
  std::string problem;
  std::string algorithm;
  std::size_t run_index = 0;
  std::uint64_t seed = 0;
  std::size_t dimension = 0;
  std::size_t budget = 0;
  RunResult result;
};

// Deterministic per-cell seed: base_seed + FNV-1a64(problem, algorithm, run).
std::uint64_t run_seed(std::uint64_t base_seed, const std::string& problem,
                       const std::string& algorithm, std::size_t run_index);

// Record files are JSON; the best-so-far trace is stored as change points
// (index, value), which round-trips bit-exactly and is ~1000x smaller than
// the expanded trace. include_timing=false drops the wall-clock field so the
// serialization is reproducible across reruns.
std::string record_to_json(const RunRecord& record, bool include_timing = true);
RunRecord record_from_json(const std::string& text);
std::string record_filename(const std::string& problem, const std::string& algorithm,
                            std::size_t run_index);

// Executes the full grid (problems x algorithms x runs). With an output_dir,
// each finished run is persisted immediately and existing valid record files
// are reused, so an interrupted experiment resumes where it stopped. Records
// come back sorted by (problem, algorithm, run) in config order.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config);

struct RankSumResult {
  double statistic = 0.0;  // rank sum of the first sample, midranks for ties
  double p_value = 1.0;    // two-sided
  bool exact = false;      // enumeration (small samples) vs normal approximation
};

enum class RankSumMode {
  kAuto,         // exact when n + m <= 16, approximation otherwise
  kExact,        // force enumeration (rejects n + m > 20)
  kApproximate,  // force the normal approximation
};

// Two-sided Wilcoxon rank-sum test. The exact path enumerates every n-subset
// of the joint midranks; the approximate path is the normal approximation
// with tie correction and continuity correction. Throws std::invalid_argument
// on empty or non-finite samples.
RankSumResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b,
                                RankSumMode mode = RankSumMode::kAuto);

struct NormalizedCurve {
  std::string algorithm;
  std::size_t runs = 0;
  Vector mean;    // per evaluation, in [0, 1]
  Vector stddev;  // per evaluation
};

// Best-so-far curves for one problem, min-max normalized with a single
// (min, max) taken over every run of every algorithm on that problem, then
// averaged per algorithm. A flat problem (max == min) normalizes to zeros.
std::vector<NormalizedCurve> normalize_costs(const std::vector<RunRecord>& records,
                                             const std::string& problem);

struct AlgorithmSummary {
  std::string algorithm;
  std::size_t runs = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample stddev of final values
  double best = 0.0;
  double worst = 0.0;
  double median = 0.0;
  double p_value = -1.0;    // vs reference; -1 for the reference itself
  std::string symbol;       // "+", "-", "~" or "ref"
};

struct ProblemReport {
  std::string problem;
  std::vector<AlgorithmSummary> algorithms;
  std::vector<NormalizedCurve> curves;
};

struct StatsReport {
  std::string reference;
  double alpha = 0.05;
  std::vector<ProblemReport> problems;
};

// Aggregates final fitness statistics and significance symbols against the
// reference algorithm ("+" = significantly better than the reference at
// alpha, "-" = significantly worse, "~" = no significant difference).
StatsReport build_stats_report(const std::vector<RunRecord>& records,
                               const std::string& reference = "abom", double alpha = 0.05);

// Writes traces.csv (expanded best-so-far, one row per evaluation),
// summary.json (per-problem statistics and symbols) and curves.csv
// (normalized mean/stddev curves, downsampled to at most 500 points per
// curve). Throws std::invalid_argument when records is empty.
void emit_report(const std::vector<RunRecord>& records, const std::string& out_dir,
                 const std::string& reference = "abom", double alpha = 0.05);

}  // namespace abom
