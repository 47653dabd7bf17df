#pragma once

#include <cstdint>

#include "abom/matrix.hpp"
#include "abom/operators.hpp"
#include "abom/theta.hpp"

namespace abom {

// Squared Frobenius distance between the offspring block and the elite block.
// Row i of `offspring` is paired with row i of `elites`.
double adaptation_loss(const Matrix& offspring, const Matrix& elites);

// Analytic gradient of adaptation_loss(trace.offspring, elites) with respect
// to every parameter recorded in the trace. Reverse pass through mutation,
// the standardization statistics, crossover and selection attention.
ThetaGradients backward(const ForwardTrace& trace, const Matrix& elites);

// Same, but the loss is taken on the offspring clamped to [lower, upper]
// (that is what actually got evaluated); coordinates that were clamped pass
// zero gradient.
ThetaGradients backward_clamped(const ForwardTrace& trace, const Matrix& elites,
                                const Vector& lower, const Vector& upper);

// Core reverse pass from an arbitrary seed gradient on the offspring matrix.
ThetaGradients backward_from_output_grad(const ForwardTrace& trace, const Matrix& grad_offspring);

struct AdamWConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
  void validate() const;
};

// Decoupled weight decay Adam. Moments mirror the parameter layout.
struct AdamWState {
  AdamWConfig config;
  ThetaParams first_moment;
  ThetaParams second_moment;
  long step_count = 0;

  static AdamWState create(const ThetaParams& shape_like, const AdamWConfig& config = {});
};

// One update step:
//   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
//   theta <- theta - lr * (mhat / (sqrt(vhat) + eps) + wd * theta)
// Throws std::invalid_argument on shape mismatch or non-finite gradients.
void adamw_step(ThetaParams& theta, const ThetaGradients& grads, AdamWState& state);

// Finite-difference validation of the analytic gradient on small random
// instances with frozen dropout masks.
struct GradCheckConfig {
  std::size_t instances = 20;
  std::size_t population = 6;
  std::size_t dim = 5;
  std::size_t attention_dim = 4;
  std::size_t hidden_dim = 4;
  double step = 1e-5;
  double tolerance = 1e-4;
  double dropout_rate = 0.5;
  std::uint64_t seed = 1234;
};

struct GradCheckReport {
  std::size_t instances = 0;
  double max_rel_error = 0.0;
  double seconds = 0.0;
  bool pass = false;
  Vector per_instance_max;
};

GradCheckReport run_gradient_check(const GradCheckConfig& config = {});

}  // namespace abom
