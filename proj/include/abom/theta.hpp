#pragma once

#include <cstddef>
#include <span>

#include "abom/matrix.hpp"
#include "abom/rng.hpp"

namespace abom {

// All trainable operator parameters. Biases are stored as 1 x k matrices so
// that every field is a Matrix and optimizer/gradient code can iterate the
// field table below instead of special-casing.
struct ThetaParams {
  // Selection attention: population and fitness query/key projections.
  Matrix pop_query;  // d x d_A
  Matrix pop_key;    // d x d_A
  Matrix fit_query;  // 1 x d_A
  Matrix fit_key;    // 1 x d_A

  // Per-gene projections for the mutation mixing matrix.
  Matrix gene_query;  // 1 x d_A
  Matrix gene_key;    // 1 x d_A

  // Crossover MLP: tanh hidden layer, linear output, residual add outside.
  Matrix cross_hidden_w;  // d x d_M
  Matrix cross_hidden_b;  // 1 x d_M
  Matrix cross_out_w;     // d_M x d
  Matrix cross_out_b;     // 1 x d

  // Mutation MLP, same shape family.
  Matrix mut_hidden_w;  // d x d_M
  Matrix mut_hidden_b;  // 1 x d_M
  Matrix mut_out_w;     // d_M x d
  Matrix mut_out_b;     // 1 x d

  static ThetaParams zeros(std::size_t dim, std::size_t attention_dim, std::size_t hidden_dim);

  bool all_finite() const;
  std::size_t parameter_count() const;
};

// Gradients share the exact field layout.
using ThetaGradients = ThetaParams;

struct ThetaField {
  const char* name;
  Matrix ThetaParams::* member;
};

// Fixed iteration order for init, optimizer updates and serialization.
std::span<const ThetaField> theta_fields();

// Hyperparameter defaults tied to the search dimension.
std::size_t default_attention_dim(std::size_t dim);  // d
std::size_t default_hidden_dim(std::size_t dim);     // largest power of two <= d

// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases. fan_in is
// the row count of each weight matrix (1 for the per-scalar projections).
ThetaParams init_theta(std::size_t dim, std::size_t attention_dim, std::size_t hidden_dim,
                       RngStream& rng);

}  // namespace abom
