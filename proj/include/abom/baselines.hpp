#pragma once

#include <cstdint>

#include "abom/evolution.hpp"
#include "abom/matrix.hpp"
#include "abom/rng.hpp"

namespace abom {

// Shared knobs for the classical baselines. Population and budget semantics
// match the main optimizer: budget counts every objective evaluation, the
// initial population included.
struct BaselineConfig {
  std::size_t population_size = 20;
  Vector lower;
  Vector upper;
  std::size_t budget = 20000;
  std::uint64_t seed = 0;

  // DE/rand/1/bin
  double de_weight = 0.5;     // differential weight F
  double de_crossover = 0.5;  // crossover probability CR

  // PSO, inertia decayed linearly over the generations
  double pso_cognitive = 2.0;
  double pso_social = 2.0;
  double pso_inertia_start = 0.9;
  double pso_inertia_end = 0.4;
  double pso_velocity_fraction = 0.2;  // velocity clamp as a fraction of box width

  std::size_t dimension() const { return lower.size(); }
  std::size_t generations() const;
  void validate() const;
};

// Uniform sampling of the box, one evaluation per draw.
RunResult run_random_search(const Objective& objective, const BaselineConfig& config,
                            RngStream& rng);

// DE/rand/1/bin with synchronous replacement; trial accepted on <=.
RunResult run_de(const Objective& objective, const BaselineConfig& config, RngStream& rng);

// Global-best PSO, zero initial velocities, synchronous gbest update.
RunResult run_pso(const Objective& objective, const BaselineConfig& config, RngStream& rng);

// Main optimizer with components disabled via config.ablation.
RunResult run_ablation(const Objective& objective, const OptimizerConfig& config, RngStream& rng);

// Inertia weight at generation `gen` of `total`; exposed for testing.
double pso_inertia(std::size_t gen, std::size_t total, double start, double end);

}  // namespace abom
