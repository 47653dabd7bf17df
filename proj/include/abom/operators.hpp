#pragma once

#include <cstddef>
#include <vector>

#include "abom/matrix.hpp"
#include "abom/rng.hpp"
#include "abom/theta.hpp"

namespace abom {

// Knobs for one reproduction step. attention_dim / hidden_dim of 0 mean
// "derive from the search dimension" (d and the largest power of two <= d).
struct OperatorSettings {
  std::size_t attention_dim = 0;
  std::size_t hidden_dim = 0;
  double crossover_dropout = 0.95;
  double mutation_dropout = 0.95;
  // By default the selection score inputs (population columns and the fitness
  // vector) are z-scored before the query/key projections: raw fitness spans
  // many orders of magnitude on the benchmark suite and saturates the
  // selection softmax into a one-hot that clones a single parent, which can
  // collapse population diversity within a few generations. The gene-mixing
  // score path and both value paths always see raw coordinates, exactly as
  // the operator equations are written. Setting raw_attention_inputs feeds
  // the selection scores raw as well (fidelity mode).
  bool raw_attention_inputs = false;
  bool skip_crossover = false;
  bool skip_mutation = false;

  std::size_t resolved_attention_dim(std::size_t dim) const {
    return attention_dim == 0 ? default_attention_dim(dim) : attention_dim;
  }
  std::size_t resolved_hidden_dim(std::size_t dim) const {
    return hidden_dim == 0 ? default_hidden_dim(dim) : hidden_dim;
  }
  void validate() const;
};

struct CrossoverTrace {
  Matrix recombined;  // selection-weighted pool, A * P, N x d
  Matrix hidden;      // tanh activations, N x d_M
  Matrix mask;        // Bernoulli keep mask on the hidden layer, N x d_M
  Matrix delta;       // MLP output added to P, N x d
};

struct MutationTrace {
  // The gene-mixing score path reads the raw candidate rows directly; see
  // ForwardTrace::candidates.
  std::vector<Matrix> query;   // per individual, d x d_A
  std::vector<Matrix> key;     // per individual, d x d_A
  std::vector<Matrix> mixing;  // per individual row-stochastic d x d
  Matrix mixed;                // row i = mixing_i * candidate_i, N x d
  Matrix hidden;               // tanh activations, N x d_M
  Matrix mask;                 // N x d_M
  Matrix delta;                // N x d
};

// Everything the adaptation step needs to differentiate one reproduction
// without re-running it: inputs, every intermediate, and the parameters the
// step was computed with.
struct ForwardTrace {
  Matrix population;  // P, N x d
  Vector fitness;     // N

  bool standardized = false;  // selection score inputs were z-scored
  Matrix population_std;      // selection score view of P (empty when raw)
  Vector fitness_std;

  bool crossover_applied = false;
  Matrix sel_pop_query, sel_pop_key;  // N x d_A
  Matrix sel_fit_query, sel_fit_key;  // N x d_A
  Matrix selection;                   // row-stochastic N x N
  CrossoverTrace cross;
  Matrix candidates;  // P', N x d

  bool mutation_applied = false;
  MutationTrace mut;

  Matrix offspring;  // P_hat, N x d

  ThetaParams theta;
  std::size_t attention_dim = 0;
  std::size_t hidden_dim = 0;
};

// Row-stochastic pairwise selection weights from population geometry plus
// fitness similarity. Standalone entry point; reproduce() computes the same
// matrix inline. Score inputs are z-scored unless standardize_inputs is
// false.
Matrix selection_matrix(const Matrix& population, const Vector& fitness, const ThetaParams& theta,
                        std::size_t attention_dim, bool standardize_inputs = true);

// Row-stochastic d x d gene-mixing matrix for one individual. The score path
// reads the raw individual, matching reproduce().
Matrix mutation_matrix(std::span<const double> individual, const ThetaParams& theta,
                       std::size_t attention_dim);

// Standalone crossover step: population + masked MLP of the selection-weighted
// pool. One fresh dropout mask per row is drawn from `rng`.
Matrix crossover(const Matrix& population, const Matrix& selection, const ThetaParams& theta,
                 double dropout_rate, std::size_t hidden_dim, RngStream& rng);

// Standalone mutation step applied to every row of `candidates` (raw score
// inputs, matching mutation_matrix).
Matrix mutate(const Matrix& candidates, const ThetaParams& theta, double dropout_rate,
              std::size_t attention_dim, std::size_t hidden_dim, RngStream& rng);

struct ReproduceResult {
  Matrix offspring;
  ForwardTrace trace;
};

// One full reproduction: selection -> crossover -> mutation, fresh dropout
// masks from `rng` (one split per operator, one mask per individual).
ReproduceResult reproduce(const Matrix& population, const Vector& fitness,
                          const ThetaParams& theta, const OperatorSettings& settings,
                          RngStream& rng);

// Same computation with caller-supplied masks (N x d_M each). Used by the
// finite-difference checks, which must hold the stochastic path fixed.
ReproduceResult reproduce_with_masks(const Matrix& population, const Vector& fitness,
                                     const ThetaParams& theta, const OperatorSettings& settings,
                                     const Matrix& crossover_mask, const Matrix& mutation_mask);

}  // namespace abom
