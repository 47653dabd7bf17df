#include "abom/adaptation.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace abom {

namespace {

Matrix column_sums(const Matrix& m) {
  Matrix out(1, m.cols());
  double* o = out.row_data(0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* r = m.row_data(i);
    for (std::size_t j = 0; j < m.cols(); ++j) o[j] += r[j];
  }
  return out;
}

// MLP adjoint shared by both operators. Layout (row convention):
//   hidden = tanh(input * w_h + b_h), out = (hidden . mask) * w_o + b_o
// Accumulates parameter gradients and returns the gradient w.r.t. `input`.
struct MlpGrads {
  Matrix* hidden_w;
  Matrix* hidden_b;
  Matrix* out_w;
  Matrix* out_b;
};

Matrix mlp_backward(const Matrix& input, const Matrix& hidden, const Matrix& mask,
                    const Matrix& hidden_w, const Matrix& out_w, const Matrix& grad_out,
                    const MlpGrads& grads) {
  add_in_place(*grads.out_b, column_sums(grad_out));
  Matrix hidden_masked = hidden;
  for (std::size_t i = 0; i < hidden_masked.size(); ++i) {
    hidden_masked.data()[i] *= mask.data()[i];
  }
  add_in_place(*grads.out_w, matmul_tn(hidden_masked, grad_out));
  Matrix grad_hidden = matmul_nt(grad_out, out_w);
  // gate by the mask and the tanh derivative
  for (std::size_t i = 0; i < grad_hidden.size(); ++i) {
    const double h = hidden.data()[i];
    grad_hidden.data()[i] *= mask.data()[i] * (1.0 - h * h);
  }
  add_in_place(*grads.hidden_b, column_sums(grad_hidden));
  add_in_place(*grads.hidden_w, matmul_tn(input, grad_hidden));
  return matmul_nt(grad_hidden, hidden_w);
}

}  // namespace

double adaptation_loss(const Matrix& offspring, const Matrix& elites) {
  if (!offspring.same_shape(elites)) {
    throw std::invalid_argument("adaptation_loss: shape mismatch");
  }
  if (!offspring.all_finite() || !elites.all_finite()) {
    throw std::invalid_argument("adaptation_loss: non-finite input");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < offspring.size(); ++i) {
    const double diff = offspring.data()[i] - elites.data()[i];
    loss += diff * diff;
  }
  return loss;
}

ThetaGradients backward_from_output_grad(const ForwardTrace& trace,
                                         const Matrix& grad_offspring) {
  if (!grad_offspring.same_shape(trace.offspring)) {
    throw std::invalid_argument("backward: seed gradient shape mismatch");
  }
  const std::size_t n = trace.population.rows();
  const std::size_t d = trace.population.cols();
  const std::size_t d_a = trace.attention_dim;
  const ThetaParams& theta = trace.theta;
  ThetaGradients g = ThetaParams::zeros(d, d_a, trace.hidden_dim);
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(d_a));

  // Gradient flowing into the candidate matrix P'.
  Matrix grad_candidates(n, d);

  if (trace.mutation_applied) {
    const MutationTrace& mt = trace.mut;
    MlpGrads mlp{&g.mut_hidden_w, &g.mut_hidden_b, &g.mut_out_w, &g.mut_out_b};
    const Matrix grad_mixed = mlp_backward(mt.mixed, mt.hidden, mt.mask, theta.mut_hidden_w,
                                           theta.mut_out_w, grad_offspring, mlp);

    // residual p_hat = p' + delta
    add_in_place(grad_candidates, grad_offspring);

    const double* wq = theta.gene_query.row_data(0);
    const double* wk = theta.gene_key.row_data(0);
    for (std::size_t i = 0; i < n; ++i) {
      const Matrix& mixing = mt.mixing[i];
      const double* du = grad_mixed.row_data(i);
      const double* cand = trace.candidates.row_data(i);

      // mixed = mixing * candidate: value-path gradient into the candidate,
      // score-path gradient into the mixing matrix.
      Matrix grad_mixing(d, d);
      double* gc = grad_candidates.row_data(i);
      for (std::size_t r = 0; r < d; ++r) {
        const double dur = du[r];
        if (dur == 0.0) continue;
        const double* mrow = mixing.row_data(r);
        double* gm = grad_mixing.row_data(r);
        for (std::size_t c = 0; c < d; ++c) {
          gm[c] = dur * cand[c];
          gc[c] += dur * mrow[c];
        }
      }

      Matrix grad_scores = softmax_rows_backward(mixing, grad_mixing);
      for (double& v : grad_scores.data()) v *= inv_scale;
      const Matrix grad_query = matmul(grad_scores, mt.key[i]);
      const Matrix grad_key = matmul_tn(grad_scores, mt.query[i]);

      // query(r, c) = candidate(i, r) * gene_query(0, c): the score path
      // contributes to the shared projections and back into the candidate.
      double* gwq = g.gene_query.row_data(0);
      double* gwk = g.gene_key.row_data(0);
      for (std::size_t r = 0; r < d; ++r) {
        const double* qr = grad_query.row_data(r);
        const double* kr = grad_key.row_data(r);
        double acc = 0.0;
        for (std::size_t c = 0; c < d_a; ++c) {
          gwq[c] += cand[r] * qr[c];
          gwk[c] += cand[r] * kr[c];
          acc += qr[c] * wq[c] + kr[c] * wk[c];
        }
        gc[r] += acc;
      }
    }
  } else {
    grad_candidates = grad_offspring;
  }

  if (trace.crossover_applied) {
    const CrossoverTrace& ct = trace.cross;
    MlpGrads mlp{&g.cross_hidden_w, &g.cross_hidden_b, &g.cross_out_w, &g.cross_out_b};
    const Matrix grad_recombined = mlp_backward(ct.recombined, ct.hidden, ct.mask,
                                                theta.cross_hidden_w, theta.cross_out_w,
                                                grad_candidates, mlp);
    // recombined = selection * population; population is a constant here.
    const Matrix grad_selection = matmul_nt(grad_recombined, trace.population);
    Matrix grad_scores = softmax_rows_backward(trace.selection, grad_selection);
    for (double& v : grad_scores.data()) v *= inv_scale;

    const Matrix grad_pop_query = matmul(grad_scores, trace.sel_pop_key);
    const Matrix grad_pop_key = matmul_tn(grad_scores, trace.sel_pop_query);
    const Matrix grad_fit_query = matmul(grad_scores, trace.sel_fit_key);
    const Matrix grad_fit_key = matmul_tn(grad_scores, trace.sel_fit_query);

    const Matrix& pop_view = trace.standardized ? trace.population_std : trace.population;
    const Vector& fit_view = trace.standardized ? trace.fitness_std : trace.fitness;
    add_in_place(g.pop_query, matmul_tn(pop_view, grad_pop_query));
    add_in_place(g.pop_key, matmul_tn(pop_view, grad_pop_key));
    // fit projections: query row i = fitness_i * fit_query
    double* gfq = g.fit_query.row_data(0);
    double* gfk = g.fit_key.row_data(0);
    for (std::size_t i = 0; i < n; ++i) {
      const double f = fit_view[i];
      if (f == 0.0) continue;
      const double* qr = grad_fit_query.row_data(i);
      const double* kr = grad_fit_key.row_data(i);
      for (std::size_t c = 0; c < d_a; ++c) {
        gfq[c] += f * qr[c];
        gfk[c] += f * kr[c];
      }
    }
  }

  return g;
}

ThetaGradients backward(const ForwardTrace& trace, const Matrix& elites) {
  if (!elites.same_shape(trace.offspring)) {
    throw std::invalid_argument("backward: elite block shape mismatch");
  }
  Matrix seed = sub(trace.offspring, elites);
  for (double& v : seed.data()) v *= 2.0;
  return backward_from_output_grad(trace, seed);
}

ThetaGradients backward_clamped(const ForwardTrace& trace, const Matrix& elites,
                                const Vector& lower, const Vector& upper) {
  if (!elites.same_shape(trace.offspring)) {
    throw std::invalid_argument("backward_clamped: elite block shape mismatch");
  }
  if (lower.size() != trace.offspring.cols() || upper.size() != trace.offspring.cols()) {
    throw std::invalid_argument("backward_clamped: bounds size mismatch");
  }
  Matrix seed(trace.offspring.rows(), trace.offspring.cols());
  for (std::size_t i = 0; i < seed.rows(); ++i) {
    for (std::size_t j = 0; j < seed.cols(); ++j) {
      const double raw = trace.offspring(i, j);
      if (raw < lower[j] || raw > upper[j]) continue;  // clamped: gradient blocked
      seed(i, j) = 2.0 * (raw - elites(i, j));
    }
  }
  return backward_from_output_grad(trace, seed);
}

void AdamWConfig::validate() const {
  if (!(learning_rate > 0.0) || !(beta1 >= 0.0 && beta1 < 1.0) ||
      !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0) || !(weight_decay >= 0.0)) {
    throw std::invalid_argument("AdamWConfig: invalid hyperparameters");
  }
}

AdamWState AdamWState::create(const ThetaParams& shape_like, const AdamWConfig& config) {
  config.validate();
  AdamWState st;
  st.config = config;
  st.first_moment = shape_like;
  st.second_moment = shape_like;
  for (const ThetaField& f : theta_fields()) {
    for (double& v : (st.first_moment.*f.member).data()) v = 0.0;
    for (double& v : (st.second_moment.*f.member).data()) v = 0.0;
  }
  return st;
}

void adamw_step(ThetaParams& theta, const ThetaGradients& grads, AdamWState& state) {
  for (const ThetaField& f : theta_fields()) {
    if (!(theta.*f.member).same_shape(grads.*f.member) ||
        !(theta.*f.member).same_shape(state.first_moment.*f.member)) {
      throw std::invalid_argument("adamw_step: shape mismatch");
    }
  }
  if (!grads.all_finite()) {
    throw std::invalid_argument("adamw_step: non-finite gradients");
  }
  const AdamWConfig& c = state.config;
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bias1 = 1.0 - std::pow(c.beta1, t);
  const double bias2 = 1.0 - std::pow(c.beta2, t);
  for (const ThetaField& f : theta_fields()) {
    Vector& p = (theta.*f.member).data();
    const Vector& gv = (grads.*f.member).data();
    Vector& m = (state.first_moment.*f.member).data();
    Vector& v = (state.second_moment.*f.member).data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * gv[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * gv[i] * gv[i];
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      p[i] -= c.learning_rate * (m_hat / (std::sqrt(v_hat) + c.epsilon) + c.weight_decay * p[i]);
    }
  }
}

GradCheckReport run_gradient_check(const GradCheckConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  GradCheckReport report;
  report.instances = config.instances;
  report.per_instance_max.assign(config.instances, 0.0);

  OperatorSettings settings;
  settings.attention_dim = config.attention_dim;
  settings.hidden_dim = config.hidden_dim;
  settings.crossover_dropout = config.dropout_rate;
  settings.mutation_dropout = config.dropout_rate;

  for (std::size_t inst = 0; inst < config.instances; ++inst) {
    // Alternate between the default standardized selection scores and the
    // raw fidelity path so both adjoints stay covered.
    settings.raw_attention_inputs = (inst % 2 == 1);
    RngStream rng(config.seed, inst);
    const std::size_t n = config.population;
    const std::size_t d = config.dim;

    Matrix population(n, d);
    for (double& v : population.data()) v = rng.uniform(-5.0, 5.0);
    Vector fitness(n);
    for (double& v : fitness) v = rng.uniform(0.0, 10.0);
    RngStream theta_rng = rng.split(17);
    ThetaParams theta = init_theta(d, config.attention_dim, config.hidden_dim, theta_rng);
    RngStream mask_rng = rng.split(29);
    const double keep = dropout_scale(config.dropout_rate);
    Matrix cross_mask(n, config.hidden_dim);
    Matrix mut_mask(n, config.hidden_dim);
    for (double& v : cross_mask.data()) {
      v = mask_rng.next_double() >= config.dropout_rate ? keep : 0.0;
    }
    for (double& v : mut_mask.data()) {
      v = mask_rng.next_double() >= config.dropout_rate ? keep : 0.0;
    }

    const ReproduceResult base =
        reproduce_with_masks(population, fitness, theta, settings, cross_mask, mut_mask);
    // Elites near the offspring keep the loss scale small, which keeps the
    // finite-difference cancellation noise well under the tolerance.
    Matrix elites = base.offspring;
    for (double& v : elites.data()) v += rng.uniform(-1.0, 1.0);

    const ThetaGradients analytic = backward(base.trace, elites);

    const auto loss_at = [&](const ThetaParams& t) {
      const ReproduceResult r =
          reproduce_with_masks(population, fitness, t, settings, cross_mask, mut_mask);
      return adaptation_loss(r.offspring, elites);
    };

    double inst_max = 0.0;
    for (const ThetaField& f : theta_fields()) {
      const Vector& ag = (analytic.*f.member).data();
      for (std::size_t p = 0; p < ag.size(); ++p) {
        ThetaParams probe = theta;
        Vector& pv = (probe.*f.member).data();
        const double original = pv[p];
        pv[p] = original + config.step;
        const double up = loss_at(probe);
        pv[p] = original - config.step;
        const double down = loss_at(probe);
        const double numeric = (up - down) / (2.0 * config.step);
        const double denom = std::max({std::abs(ag[p]), std::abs(numeric), 1e-8});
        inst_max = std::max(inst_max, std::abs(ag[p] - numeric) / denom);
      }
    }
    report.per_instance_max[inst] = inst_max;
    report.max_rel_error = std::max(report.max_rel_error, inst_max);
  }

  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.pass = report.max_rel_error <= config.tolerance;
  return report;
}

}  // namespace abom
