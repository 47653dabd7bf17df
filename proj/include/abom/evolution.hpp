#pragma once

#include <cstdint>
#include <functional>

#include "abom/adaptation.hpp"
#include "abom/matrix.hpp"
#include "abom/operators.hpp"
#include "abom/rng.hpp"

namespace abom {

using Objective = std::function<double(std::span<const double>)>;

// Switches that disable individual pieces of the optimizer, used for
// component-contribution studies. no_adaptation freezes the operator
// parameters at their random initialization.
struct AblationFlags {
  bool no_crossover = false;
  bool no_mutation = false;
  bool no_adaptation = false;
};

struct OptimizerConfig {
  std::size_t population_size = 20;
  Vector lower;
  Vector upper;
  std::size_t budget = 20000;  // total objective evaluations, init included

  std::size_t attention_dim = 0;  // 0: use the search dimension
  std::size_t hidden_dim = 0;     // 0: largest power of two <= dimension
  double crossover_dropout = 0.95;
  double mutation_dropout = 0.95;
  // Feed the selection scores raw instead of z-scored (fidelity mode; see
  // OperatorSettings::raw_attention_inputs).
  bool raw_attention_inputs = false;
  AdamWConfig optimizer;

  std::uint64_t seed = 0;
  AblationFlags ablation;
  // Pair offspring rows to elite rows by fitness rank instead of row order
  // when forming the adaptation target.
  bool pair_offspring_by_fitness = false;

  std::size_t dimension() const { return lower.size(); }
  std::size_t generations() const;
  OperatorSettings operator_settings() const;
  void validate() const;
};

struct RunResult {
  Vector best;                // best point ever evaluated
  double best_fitness = 0.0;
  Vector best_so_far;         // length == evaluations, monotone non-increasing
  Vector adaptation_loss;     // one entry per generation (empty for baselines)
  std::size_t generations = 0;
  std::size_t evaluations = 0;
  std::size_t skipped_updates = 0;  // non-finite gradient guard hits
  double elapsed_seconds = 0.0;
};

// Top-n of the parent/offspring union. Sort is ascending by fitness; ties
// keep parents ahead of offspring, then lower row index, so the outcome is
// deterministic.
struct ElitePool {
  Matrix population;
  Vector fitness;
};
ElitePool elitism_merge(const Matrix& parents, const Vector& parent_fitness,
                        const Matrix& offspring, const Vector& offspring_fitness, std::size_t n);

Matrix clamp_to_bounds(const Matrix& points, const Vector& lower, const Vector& upper);

// Full optimizer loop: Latin hypercube init, then per generation reproduce ->
// clamp -> evaluate -> elite merge -> gradient step toward the elites ->
// elite set carried forward (slot-preserving: survivors keep their rows,
// accepted offspring fill the vacated rows in rank order). Consumes exactly
//   population + generations() * population
// objective evaluations. Throws std::runtime_error if the objective returns
// a non-finite value.
RunResult run_abom(const Objective& objective, const OptimizerConfig& config, RngStream& rng);

// Convenience: seeds the stream from config.seed.
RunResult run_abom(const Objective& objective, const OptimizerConfig& config);

}  // namespace abom
