#include "abom/evolution.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace abom {

namespace {

void evaluate_rows(const Objective& objective, const Matrix& points, Vector& out,
                   RunResult& result) {
  out.resize(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const double f = objective(points.row(i));
    if (!std::isfinite(f)) {
      throw std::runtime_error("objective returned a non-finite value at evaluation " +
                               std::to_string(result.evaluations + 1));
    }
    out[i] = f;
    result.evaluations += 1;
    if (result.best_so_far.empty() || f < result.best_fitness) {
      result.best_fitness = f;
      result.best.assign(points.row(i).begin(), points.row(i).end());
    }
    result.best_so_far.push_back(result.best_fitness);
  }
}

}  // namespace

std::size_t OptimizerConfig::generations() const {
  if (budget < population_size) return 0;
  return (budget - population_size) / population_size;
}

OperatorSettings OptimizerConfig::operator_settings() const {
  OperatorSettings s;
  s.attention_dim = attention_dim;
  s.hidden_dim = hidden_dim;
  s.crossover_dropout = crossover_dropout;
  s.mutation_dropout = mutation_dropout;
  s.raw_attention_inputs = raw_attention_inputs;
  s.skip_crossover = ablation.no_crossover;
  s.skip_mutation = ablation.no_mutation;
  return s;
}

void OptimizerConfig::validate() const {
  if (population_size < 2) {
    throw std::invalid_argument("OptimizerConfig: population_size must be at least 2");
  }
  if (lower.empty() || lower.size() != upper.size()) {
    throw std::invalid_argument("OptimizerConfig: bad bound vectors");
  }
  for (std::size_t j = 0; j < lower.size(); ++j) {
    if (!(lower[j] < upper[j]) || !std::isfinite(lower[j]) || !std::isfinite(upper[j])) {
      throw std::invalid_argument("OptimizerConfig: lower bound must be below upper bound");
    }
  }
  if (budget < population_size) {
    throw std::invalid_argument("OptimizerConfig: budget smaller than one population");
  }
  operator_settings().validate();
  optimizer.validate();
}

namespace {

struct MergeEntry {
  double fitness;
  int source;  // 0 parent, 1 offspring
  std::size_t index;
};

// Ascending by fitness; ties keep parents ahead of offspring, then lower
// original index. Shared by elitism_merge and the survivor bookkeeping in
// run_abom so both always agree on who the elites are.
std::vector<MergeEntry> merge_order(const Vector& parent_fitness,
                                    const Vector& offspring_fitness) {
  std::vector<MergeEntry> entries;
  entries.reserve(parent_fitness.size() + offspring_fitness.size());
  for (std::size_t i = 0; i < parent_fitness.size(); ++i) {
    entries.push_back({parent_fitness[i], 0, i});
  }
  for (std::size_t i = 0; i < offspring_fitness.size(); ++i) {
    entries.push_back({offspring_fitness[i], 1, i});
  }
  std::sort(entries.begin(), entries.end(), [](const MergeEntry& a, const MergeEntry& b) {
    if (a.fitness != b.fitness) return a.fitness < b.fitness;
    if (a.source != b.source) return a.source < b.source;
    return a.index < b.index;
  });
  return entries;
}

}  // namespace

ElitePool elitism_merge(const Matrix& parents, const Vector& parent_fitness,
                        const Matrix& offspring, const Vector& offspring_fitness,
                        std::size_t n) {
  if (parents.rows() != parent_fitness.size() || offspring.rows() != offspring_fitness.size()) {
    throw std::invalid_argument("elitism_merge: fitness size mismatch");
  }
  if (!offspring.empty() && !parents.empty() && parents.cols() != offspring.cols()) {
    throw std::invalid_argument("elitism_merge: dimension mismatch");
  }
  const std::size_t total = parents.rows() + offspring.rows();
  if (n == 0 || n > total) {
    throw std::invalid_argument("elitism_merge: n out of range");
  }

  const std::vector<MergeEntry> entries = merge_order(parent_fitness, offspring_fitness);
  const std::size_t d = parents.empty() ? offspring.cols() : parents.cols();
  ElitePool pool;
  pool.population = Matrix(n, d);
  pool.fitness.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const MergeEntry& e = entries[i];
    const Matrix& src = e.source == 0 ? parents : offspring;
    std::copy_n(src.row_data(e.index), d, pool.population.row_data(i));
    pool.fitness[i] = e.fitness;
  }
  return pool;
}

Matrix clamp_to_bounds(const Matrix& points, const Vector& lower, const Vector& upper) {
  if (points.cols() != lower.size() || points.cols() != upper.size()) {
    throw std::invalid_argument("clamp_to_bounds: bounds size mismatch");
  }
  Matrix out = points;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double* r = out.row_data(i);
    for (std::size_t j = 0; j < out.cols(); ++j) {
      r[j] = std::clamp(r[j], lower[j], upper[j]);
    }
  }
  return out;
}

RunResult run_abom(const Objective& objective, const OptimizerConfig& config, RngStream& rng) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = config.population_size;
  const std::size_t d = config.dimension();
  const OperatorSettings settings = config.operator_settings();
  const std::size_t d_a = settings.resolved_attention_dim(d);
  const std::size_t d_m = settings.resolved_hidden_dim(d);

  RunResult result;
  result.best_fitness = std::numeric_limits<double>::infinity();

  RngStream theta_rng = rng.split(0x7468657461ULL);  // independent of sampling
  ThetaParams theta = init_theta(d, d_a, d_m, theta_rng);
  AdamWState adamw = AdamWState::create(theta, config.optimizer);

  RngStream init_rng = rng.split(0x696e6974ULL);
  Matrix population = latin_hypercube(n, config.lower, config.upper, init_rng);
  Vector fitness;
  evaluate_rows(objective, population, fitness, result);

  const std::size_t generations = config.generations();
  result.adaptation_loss.reserve(generations);
  RngStream op_rng = rng.split(0x6f7073ULL);

  Vector offspring_fitness;
  for (std::size_t gen = 0; gen < generations; ++gen) {
    ReproduceResult rep = reproduce(population, fitness, theta, settings, op_rng);
    const Matrix offspring = clamp_to_bounds(rep.offspring, config.lower, config.upper);
    evaluate_rows(objective, offspring, offspring_fitness, result);

    const ElitePool elites =
        elitism_merge(population, fitness, offspring, offspring_fitness, n);

    // Adaptation target: elite row per offspring row. Default pairing is by
    // row order; the optional mode matches fitness ranks (best offspring is
    // pulled toward the best elite).
    Matrix target = elites.population;
    if (config.pair_offspring_by_fitness) {
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (offspring_fitness[a] != offspring_fitness[b]) {
          return offspring_fitness[a] < offspring_fitness[b];
        }
        return a < b;
      });
      Matrix permuted(n, d);
      for (std::size_t rank = 0; rank < n; ++rank) {
        std::copy_n(elites.population.row_data(rank), d, permuted.row_data(order[rank]));
      }
      target = std::move(permuted);
    }

    result.adaptation_loss.push_back(adaptation_loss(offspring, target));

    if (!config.ablation.no_adaptation) {
      const ThetaGradients grads =
          backward_clamped(rep.trace, target, config.lower, config.upper);
      if (grads.all_finite()) {
        adamw_step(theta, grads, adamw);
      } else {
        result.skipped_updates += 1;  // keep theta, keep going
      }
    }

    // Carry the elite set forward slot-preserving: surviving parents stay in
    // their rows, accepted offspring fill the vacated rows in rank order. A
    // sorted carry would make parent row i track elite row i within a few
    // generations, collapsing the adaptation loss to zero before the
    // operators learn anything; keeping survivors in place preserves the
    // misalignment and with it the regression signal.
    const std::vector<MergeEntry> order = merge_order(fitness, offspring_fitness);
    std::vector<char> survives(n, 0);
    std::vector<std::size_t> accepted;
    accepted.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      if (order[k].source == 0) {
        survives[order[k].index] = 1;
      } else {
        accepted.push_back(order[k].index);
      }
    }
    std::size_t next_accepted = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (survives[i]) continue;
      const std::size_t j = accepted[next_accepted++];
      std::copy_n(offspring.row_data(j), d, population.row_data(i));
      fitness[i] = offspring_fitness[j];
    }
    result.generations += 1;
  }

  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

RunResult run_abom(const Objective& objective, const OptimizerConfig& config) {
  RngStream rng(config.seed, 0);
  return run_abom(objective, config, rng);
}

}  // namespace abom
