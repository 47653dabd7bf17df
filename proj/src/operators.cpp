#include "abom/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace abom {

namespace {

void require_theta_shapes(const ThetaParams& t, std::size_t d, std::size_t d_a,
                          std::size_t d_m) {
  const bool ok = t.pop_query.rows() == d && t.pop_query.cols() == d_a &&
                  t.pop_key.rows() == d && t.pop_key.cols() == d_a &&
                  t.fit_query.rows() == 1 && t.fit_query.cols() == d_a &&
                  t.fit_key.rows() == 1 && t.fit_key.cols() == d_a &&
                  t.gene_query.rows() == 1 && t.gene_query.cols() == d_a &&
                  t.gene_key.rows() == 1 && t.gene_key.cols() == d_a &&
                  t.cross_hidden_w.rows() == d && t.cross_hidden_w.cols() == d_m &&
                  t.cross_hidden_b.rows() == 1 && t.cross_hidden_b.cols() == d_m &&
                  t.cross_out_w.rows() == d_m && t.cross_out_w.cols() == d &&
                  t.cross_out_b.rows() == 1 && t.cross_out_b.cols() == d &&
                  t.mut_hidden_w.rows() == d && t.mut_hidden_w.cols() == d_m &&
                  t.mut_hidden_b.rows() == 1 && t.mut_hidden_b.cols() == d_m &&
                  t.mut_out_w.rows() == d_m && t.mut_out_w.cols() == d &&
                  t.mut_out_b.rows() == 1 && t.mut_out_b.cols() == d;
  if (!ok) throw std::invalid_argument("operator parameters do not match (d, d_A, d_M)");
}

// One dropout mask per individual (row), training-mode semantics: surviving
// hidden units carry dropout_scale(rate) so the layer keeps its expected
// magnitude no matter how sparse the mask is.
Matrix mask_matrix(std::size_t n, std::size_t d_m, double rate, RngStream& rng) {
  const double scale = dropout_scale(rate);
  Matrix m(n, d_m);
  for (std::size_t i = 0; i < n; ++i) {
    const auto mask = dropout_mask(d_m, rate, rng);
    for (std::size_t j = 0; j < d_m; ++j) m(i, j) = mask[j] ? scale : 0.0;
  }
  return m;
}

// x * w + b broadcast over rows.
Matrix affine_rows(const Matrix& x, const Matrix& w, const Matrix& b) {
  Matrix out = matmul(x, w);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double* o = out.row_data(i);
    const double* bias = b.row_data(0);
    for (std::size_t j = 0; j < out.cols(); ++j) o[j] += bias[j];
  }
  return out;
}

Matrix tanh_elementwise(Matrix m) {
  for (double& v : m.data()) v = std::tanh(v);
  return m;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.data()[i];
  return out;
}

// Fitness column (N x 1) times a 1 x d_A projection row: a plain outer
// product, kept explicit instead of building the N x 1 matrix.
Matrix project_scalar_column(const Vector& column, const Matrix& projection) {
  Matrix out(column.size(), projection.cols());
  for (std::size_t i = 0; i < column.size(); ++i) {
    double* o = out.row_data(i);
    const double* p = projection.row_data(0);
    for (std::size_t k = 0; k < projection.cols(); ++k) o[k] = column[i] * p[k];
  }
  return out;
}

struct SelectionParts {
  Matrix pop_query, pop_key, fit_query, fit_key;
  Matrix selection;
};

SelectionParts compute_selection(const Matrix& pop_view, const Vector& fit_view,
                                 const ThetaParams& theta, std::size_t d_a) {
  SelectionParts parts;
  parts.pop_query = matmul(pop_view, theta.pop_query);
  parts.pop_key = matmul(pop_view, theta.pop_key);
  parts.fit_query = project_scalar_column(fit_view, theta.fit_query);
  parts.fit_key = project_scalar_column(fit_view, theta.fit_key);
  Matrix scores = matmul_nt(parts.pop_query, parts.pop_key);
  add_in_place(scores, matmul_nt(parts.fit_query, parts.fit_key));
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(d_a));
  for (double& v : scores.data()) v *= inv_scale;
  parts.selection = softmax_rows(scores);
  return parts;
}

// Gene-mixing attention for one individual: the row drives the scores and is
// also what gets mixed. Query/key matrices are returned for the adjoint
// computation.
struct GeneMix {
  Matrix query, key, mixing;
  Vector mixed;
};

GeneMix compute_gene_mix(std::span<const double> individual, const ThetaParams& theta,
                         std::size_t d_a) {
  const std::size_t d = individual.size();
  GeneMix gm;
  gm.query = Matrix(d, d_a);
  gm.key = Matrix(d, d_a);
  const double* wq = theta.gene_query.row_data(0);
  const double* wk = theta.gene_key.row_data(0);
  for (std::size_t r = 0; r < d; ++r) {
    double* q = gm.query.row_data(r);
    double* k = gm.key.row_data(r);
    const double g = individual[r];
    for (std::size_t c = 0; c < d_a; ++c) {
      q[c] = g * wq[c];
      k[c] = g * wk[c];
    }
  }
  Matrix scores = matmul_nt(gm.query, gm.key);
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(d_a));
  for (double& v : scores.data()) v *= inv_scale;
  gm.mixing = softmax_rows(scores);
  gm.mixed.assign(d, 0.0);
  for (std::size_t r = 0; r < d; ++r) {
    const double* mrow = gm.mixing.row_data(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < d; ++c) acc += mrow[c] * individual[c];
    gm.mixed[r] = acc;
  }
  return gm;
}

ReproduceResult reproduce_core(const Matrix& population, const Vector& fitness,
                               const ThetaParams& theta, const OperatorSettings& settings,
                               const Matrix* crossover_mask, const Matrix* mutation_mask,
                               RngStream* rng) {
  settings.validate();
  if (population.rows() == 0 || population.cols() == 0) {
    throw std::invalid_argument("reproduce: empty population");
  }
  if (fitness.size() != population.rows()) {
    throw std::invalid_argument("reproduce: fitness size does not match population");
  }
  if (!population.all_finite() || !all_finite(fitness)) {
    throw std::invalid_argument("reproduce: non-finite input");
  }
  const std::size_t n = population.rows();
  const std::size_t d = population.cols();
  const std::size_t d_a = settings.resolved_attention_dim(d);
  const std::size_t d_m = settings.resolved_hidden_dim(d);
  require_theta_shapes(theta, d, d_a, d_m);

  ReproduceResult result;
  ForwardTrace& trace = result.trace;
  trace.population = population;
  trace.fitness = fitness;
  trace.theta = theta;
  trace.attention_dim = d_a;
  trace.hidden_dim = d_m;
  trace.standardized = !settings.raw_attention_inputs;

  // Fresh mask streams per call: one draw advances the caller stream, the
  // masks come from splits keyed per operator so dropping one operator does
  // not shift the other's sequence.
  RngStream cross_rng, mut_rng;
  if (rng != nullptr) {
    const std::uint64_t call_key = rng->next_u64();
    cross_rng = RngStream(call_key, 1);
    mut_rng = RngStream(call_key, 2);
  }

  if (trace.standardized) {
    trace.population_std = standardize_columns(population).values;
    trace.fitness_std = standardize_vector(fitness);
  }
  const Matrix& pop_view = trace.standardized ? trace.population_std : population;
  const Vector& fit_view = trace.standardized ? trace.fitness_std : fitness;

  if (!settings.skip_crossover) {
    trace.crossover_applied = true;
    SelectionParts sel = compute_selection(pop_view, fit_view, theta, d_a);
    trace.sel_pop_query = std::move(sel.pop_query);
    trace.sel_pop_key = std::move(sel.pop_key);
    trace.sel_fit_query = std::move(sel.fit_query);
    trace.sel_fit_key = std::move(sel.fit_key);
    trace.selection = std::move(sel.selection);

    CrossoverTrace& ct = trace.cross;
    ct.mask = crossover_mask != nullptr
                  ? *crossover_mask
                  : mask_matrix(n, d_m, settings.crossover_dropout, cross_rng);
    if (ct.mask.rows() != n || ct.mask.cols() != d_m) {
      throw std::invalid_argument("reproduce: crossover mask has wrong shape");
    }
    ct.recombined = matmul(trace.selection, population);
    ct.hidden = tanh_elementwise(affine_rows(ct.recombined, theta.cross_hidden_w,
                                             theta.cross_hidden_b));
    ct.delta = affine_rows(hadamard(ct.hidden, ct.mask), theta.cross_out_w, theta.cross_out_b);
    trace.candidates = add(population, ct.delta);
  } else {
    trace.candidates = population;
  }

  if (!settings.skip_mutation) {
    trace.mutation_applied = true;
    MutationTrace& mt = trace.mut;
    mt.mask = mutation_mask != nullptr
                  ? *mutation_mask
                  : mask_matrix(n, d_m, settings.mutation_dropout, mut_rng);
    if (mt.mask.rows() != n || mt.mask.cols() != d_m) {
      throw std::invalid_argument("reproduce: mutation mask has wrong shape");
    }
    mt.query.reserve(n);
    mt.key.reserve(n);
    mt.mixing.reserve(n);
    mt.mixed = Matrix(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      GeneMix gm = compute_gene_mix(trace.candidates.row(i), theta, d_a);
      for (std::size_t j = 0; j < d; ++j) mt.mixed(i, j) = gm.mixed[j];
      mt.query.push_back(std::move(gm.query));
      mt.key.push_back(std::move(gm.key));
      mt.mixing.push_back(std::move(gm.mixing));
    }
    mt.hidden = tanh_elementwise(affine_rows(mt.mixed, theta.mut_hidden_w, theta.mut_hidden_b));
    mt.delta = affine_rows(hadamard(mt.hidden, mt.mask), theta.mut_out_w, theta.mut_out_b);
    trace.offspring = add(trace.candidates, mt.delta);
  } else {
    trace.offspring = trace.candidates;
  }

  result.offspring = trace.offspring;
  return result;
}

}  // namespace

void OperatorSettings::validate() const {
  if (!(crossover_dropout >= 0.0 && crossover_dropout <= 1.0) ||
      !(mutation_dropout >= 0.0 && mutation_dropout <= 1.0)) {
    throw std::invalid_argument("OperatorSettings: dropout rates must be in [0, 1]");
  }
}

Matrix selection_matrix(const Matrix& population, const Vector& fitness, const ThetaParams& theta,
                        std::size_t attention_dim, bool standardize_inputs) {
  if (population.rows() == 0 || population.cols() == 0) {
    throw std::invalid_argument("selection_matrix: empty population");
  }
  if (fitness.size() != population.rows()) {
    throw std::invalid_argument("selection_matrix: fitness size does not match population");
  }
  if (!population.all_finite() || !all_finite(fitness)) {
    throw std::invalid_argument("selection_matrix: non-finite input");
  }
  if (standardize_inputs) {
    const Matrix pop_view = standardize_columns(population).values;
    const Vector fit_view = standardize_vector(fitness);
    return compute_selection(pop_view, fit_view, theta, attention_dim).selection;
  }
  return compute_selection(population, fitness, theta, attention_dim).selection;
}

Matrix mutation_matrix(std::span<const double> individual, const ThetaParams& theta,
                       std::size_t attention_dim) {
  if (individual.empty()) throw std::invalid_argument("mutation_matrix: empty individual");
  if (!all_finite(individual)) throw std::invalid_argument("mutation_matrix: non-finite input");
  return compute_gene_mix(individual, theta, attention_dim).mixing;
}

Matrix crossover(const Matrix& population, const Matrix& selection, const ThetaParams& theta,
                 double dropout_rate, std::size_t hidden_dim, RngStream& rng) {
  const std::size_t n = population.rows();
  if (n == 0 || population.cols() == 0) {
    throw std::invalid_argument("crossover: empty population");
  }
  if (selection.rows() != n || selection.cols() != n) {
    throw std::invalid_argument("crossover: selection matrix must be N x N");
  }
  if (!population.all_finite() || !selection.all_finite()) {
    throw std::invalid_argument("crossover: non-finite input");
  }
  const Matrix mask = mask_matrix(n, hidden_dim, dropout_rate, rng);
  const Matrix pool = matmul(selection, population);
  const Matrix hidden =
      tanh_elementwise(affine_rows(pool, theta.cross_hidden_w, theta.cross_hidden_b));
  const Matrix delta =
      affine_rows(hadamard(hidden, mask), theta.cross_out_w, theta.cross_out_b);
  return add(population, delta);
}

Matrix mutate(const Matrix& candidates, const ThetaParams& theta, double dropout_rate,
              std::size_t attention_dim, std::size_t hidden_dim, RngStream& rng) {
  const std::size_t n = candidates.rows();
  const std::size_t d = candidates.cols();
  if (n == 0 || d == 0) throw std::invalid_argument("mutate: empty candidate matrix");
  if (!candidates.all_finite()) throw std::invalid_argument("mutate: non-finite input");
  const Matrix mask = mask_matrix(n, hidden_dim, dropout_rate, rng);
  Matrix mixed(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const GeneMix gm = compute_gene_mix(candidates.row(i), theta, attention_dim);
    for (std::size_t j = 0; j < d; ++j) mixed(i, j) = gm.mixed[j];
  }
  const Matrix hidden =
      tanh_elementwise(affine_rows(mixed, theta.mut_hidden_w, theta.mut_hidden_b));
  const Matrix delta = affine_rows(hadamard(hidden, mask), theta.mut_out_w, theta.mut_out_b);
  return add(candidates, delta);
}

ReproduceResult reproduce(const Matrix& population, const Vector& fitness,
                          const ThetaParams& theta, const OperatorSettings& settings,
                          RngStream& rng) {
  return reproduce_core(population, fitness, theta, settings, nullptr, nullptr, &rng);
}

ReproduceResult reproduce_with_masks(const Matrix& population, const Vector& fitness,
                                     const ThetaParams& theta, const OperatorSettings& settings,
                                     const Matrix& crossover_mask, const Matrix& mutation_mask) {
  return reproduce_core(population, fitness, theta, settings, &crossover_mask, &mutation_mask,
                        nullptr);
}

}  // namespace abom
