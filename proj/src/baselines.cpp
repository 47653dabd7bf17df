#include "abom/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace abom {

namespace {

double checked_eval(const Objective& objective, std::span<const double> x, RunResult& result) {
  const double f = objective(x);
  if (!std::isfinite(f)) {
    throw std::runtime_error("objective returned a non-finite value at evaluation " +
                             std::to_string(result.evaluations + 1));
  }
  result.evaluations += 1;
  if (f < result.best_fitness) {
    result.best_fitness = f;
    result.best.assign(x.begin(), x.end());
  }
  result.best_so_far.push_back(result.best_fitness);
  return f;
}

Matrix uniform_population(std::size_t n, const Vector& lower, const Vector& upper,
                          RngStream& rng) {
  Matrix pop(n, lower.size());
  for (std::size_t i = 0; i < n; ++i) {
    double* r = pop.row_data(i);
    for (std::size_t j = 0; j < lower.size(); ++j) r[j] = rng.uniform(lower[j], upper[j]);
  }
  return pop;
}

void finish(RunResult& result, const std::chrono::steady_clock::time_point& start) {
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::size_t BaselineConfig::generations() const {
  if (budget < population_size) return 0;
  return (budget - population_size) / population_size;
}

void BaselineConfig::validate() const {
  if (population_size < 4) {
    // DE/rand/1 needs three distinct partners plus the target.
    throw std::invalid_argument("BaselineConfig: population_size must be at least 4");
  }
  if (lower.empty() || lower.size() != upper.size()) {
    throw std::invalid_argument("BaselineConfig: bad bound vectors");
  }
  for (std::size_t j = 0; j < lower.size(); ++j) {
    if (!(lower[j] < upper[j]) || !std::isfinite(lower[j]) || !std::isfinite(upper[j])) {
      throw std::invalid_argument("BaselineConfig: lower bound must be below upper bound");
    }
  }
  if (budget < population_size) {
    throw std::invalid_argument("BaselineConfig: budget smaller than one population");
  }
  if (!(de_weight > 0.0) || !(de_crossover >= 0.0 && de_crossover <= 1.0)) {
    throw std::invalid_argument("BaselineConfig: bad DE parameters");
  }
  if (!(pso_velocity_fraction > 0.0)) {
    throw std::invalid_argument("BaselineConfig: bad PSO velocity clamp");
  }
}

RunResult run_random_search(const Objective& objective, const BaselineConfig& config,
                            RngStream& rng) {
  // No population here, so only the bounds and a positive budget matter.
  if (config.lower.empty() || config.lower.size() != config.upper.size()) {
    throw std::invalid_argument("run_random_search: bad bound vectors");
  }
  for (std::size_t j = 0; j < config.lower.size(); ++j) {
    if (!(config.lower[j] < config.upper[j]) || !std::isfinite(config.lower[j]) ||
        !std::isfinite(config.upper[j])) {
      throw std::invalid_argument("run_random_search: lower bound must be below upper bound");
    }
  }
  if (config.budget == 0) {
    throw std::invalid_argument("run_random_search: budget must be positive");
  }
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  result.best_fitness = std::numeric_limits<double>::infinity();
  Vector x(config.dimension());
  for (std::size_t e = 0; e < config.budget; ++e) {
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = rng.uniform(config.lower[j], config.upper[j]);
    checked_eval(objective, x, result);
  }
  finish(result, start);
  return result;
}

RunResult run_de(const Objective& objective, const BaselineConfig& config, RngStream& rng) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = config.population_size;
  const std::size_t d = config.dimension();

  RunResult result;
  result.best_fitness = std::numeric_limits<double>::infinity();

  Matrix pop = uniform_population(n, config.lower, config.upper, rng);
  Vector fit(n);
  for (std::size_t i = 0; i < n; ++i) fit[i] = checked_eval(objective, pop.row(i), result);

  const std::size_t generations = config.generations();
  Matrix trials(n, d);
  Vector trial_fit(n);
  for (std::size_t gen = 0; gen < generations; ++gen) {
    for (std::size_t i = 0; i < n; ++i) {
      // three mutually distinct partners, none equal to the target
      std::size_t r1, r2, r3;
      do { r1 = rng.next_index(n); } while (r1 == i);
      do { r2 = rng.next_index(n); } while (r2 == i || r2 == r1);
      do { r3 = rng.next_index(n); } while (r3 == i || r3 == r1 || r3 == r2);
      const std::size_t j_rand = rng.next_index(d);
      const double* a = pop.row_data(r1);
      const double* b = pop.row_data(r2);
      const double* c = pop.row_data(r3);
      const double* target = pop.row_data(i);
      double* trial = trials.row_data(i);
      for (std::size_t j = 0; j < d; ++j) {
        // one uniform draw per gene, consumed even at j == j_rand, so the
        // draw count per individual is fixed
        const double u = rng.next_double();
        if (j == j_rand || u < config.de_crossover) {
          trial[j] = std::clamp(a[j] + config.de_weight * (b[j] - c[j]), config.lower[j],
                                config.upper[j]);
        } else {
          trial[j] = target[j];
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      trial_fit[i] = checked_eval(objective, trials.row(i), result);
    }
    // synchronous replacement, ties go to the trial
    for (std::size_t i = 0; i < n; ++i) {
      if (trial_fit[i] <= fit[i]) {
        std::copy_n(trials.row_data(i), d, pop.row_data(i));
        fit[i] = trial_fit[i];
      }
    }
  }
  finish(result, start);
  return result;
}

double pso_inertia(std::size_t gen, std::size_t total, double start, double end) {
  if (total <= 1) return start;
  const double t = static_cast<double>(gen) / static_cast<double>(total - 1);
  return start + (end - start) * t;
}

RunResult run_pso(const Objective& objective, const BaselineConfig& config, RngStream& rng) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = config.population_size;
  const std::size_t d = config.dimension();

  RunResult result;
  result.best_fitness = std::numeric_limits<double>::infinity();

  Matrix pos = uniform_population(n, config.lower, config.upper, rng);
  Matrix vel(n, d);  // zero start
  Vector v_max(d);
  for (std::size_t j = 0; j < d; ++j) {
    v_max[j] = config.pso_velocity_fraction * (config.upper[j] - config.lower[j]);
  }

  Vector fit(n);
  for (std::size_t i = 0; i < n; ++i) fit[i] = checked_eval(objective, pos.row(i), result);
  Matrix pbest = pos;
  Vector pbest_fit = fit;
  std::size_t g = static_cast<std::size_t>(
      std::min_element(pbest_fit.begin(), pbest_fit.end()) - pbest_fit.begin());
  Vector gbest(pbest.row(g).begin(), pbest.row(g).end());
  double gbest_fit = pbest_fit[g];

  const std::size_t generations = config.generations();
  for (std::size_t gen = 0; gen < generations; ++gen) {
    const double w =
        pso_inertia(gen, generations, config.pso_inertia_start, config.pso_inertia_end);
    for (std::size_t i = 0; i < n; ++i) {
      double* x = pos.row_data(i);
      double* v = vel.row_data(i);
      const double* pb = pbest.row_data(i);
      for (std::size_t j = 0; j < d; ++j) {
        const double r1 = rng.next_double();
        const double r2 = rng.next_double();
        v[j] = w * v[j] + config.pso_cognitive * r1 * (pb[j] - x[j]) +
               config.pso_social * r2 * (gbest[j] - x[j]);
        v[j] = std::clamp(v[j], -v_max[j], v_max[j]);
        x[j] = std::clamp(x[j] + v[j], config.lower[j], config.upper[j]);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      fit[i] = checked_eval(objective, pos.row(i), result);
      if (fit[i] < pbest_fit[i]) {
        pbest_fit[i] = fit[i];
        std::copy_n(pos.row_data(i), d, pbest.row_data(i));
      }
    }
    // gbest moves once the whole generation has been scored
    for (std::size_t i = 0; i < n; ++i) {
      if (pbest_fit[i] < gbest_fit) {
        gbest_fit = pbest_fit[i];
        gbest.assign(pbest.row(i).begin(), pbest.row(i).end());
      }
    }
  }
  finish(result, start);
  return result;
}

RunResult run_ablation(const Objective& objective, const OptimizerConfig& config,
                       RngStream& rng) {
  return run_abom(objective, config, rng);
}

}  // namespace abom
