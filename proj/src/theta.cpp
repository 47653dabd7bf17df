#include "abom/theta.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace abom {

namespace {

constexpr std::array<ThetaField, 14> kFields = {{
    {"pop_query", &ThetaParams::pop_query},
    {"pop_key", &ThetaParams::pop_key},
    {"fit_query", &ThetaParams::fit_query},
    {"fit_key", &ThetaParams::fit_key},
    {"gene_query", &ThetaParams::gene_query},
    {"gene_key", &ThetaParams::gene_key},
    {"cross_hidden_w", &ThetaParams::cross_hidden_w},
    {"cross_hidden_b", &ThetaParams::cross_hidden_b},
    {"cross_out_w", &ThetaParams::cross_out_w},
    {"cross_out_b", &ThetaParams::cross_out_b},
    {"mut_hidden_w", &ThetaParams::mut_hidden_w},
    {"mut_hidden_b", &ThetaParams::mut_hidden_b},
    {"mut_out_w", &ThetaParams::mut_out_w},
    {"mut_out_b", &ThetaParams::mut_out_b},
}};

void fill_uniform(Matrix& m, double fan_in, RngStream& rng) {
  const double bound = 1.0 / std::sqrt(fan_in);
  for (double& v : m.data()) v = rng.uniform(-bound, bound);
}

}  // namespace

std::span<const ThetaField> theta_fields() { return kFields; }

ThetaParams ThetaParams::zeros(std::size_t dim, std::size_t attention_dim,
                               std::size_t hidden_dim) {
  if (dim == 0 || attention_dim == 0 || hidden_dim == 0) {
    throw std::invalid_argument("ThetaParams::zeros: dimensions must be positive");
  }
  ThetaParams t;
  t.pop_query = Matrix(dim, attention_dim);
  t.pop_key = Matrix(dim, attention_dim);
  t.fit_query = Matrix(1, attention_dim);
  t.fit_key = Matrix(1, attention_dim);
  t.gene_query = Matrix(1, attention_dim);
  t.gene_key = Matrix(1, attention_dim);
  t.cross_hidden_w = Matrix(dim, hidden_dim);
  t.cross_hidden_b = Matrix(1, hidden_dim);
  t.cross_out_w = Matrix(hidden_dim, dim);
  t.cross_out_b = Matrix(1, dim);
  t.mut_hidden_w = Matrix(dim, hidden_dim);
  t.mut_hidden_b = Matrix(1, hidden_dim);
  t.mut_out_w = Matrix(hidden_dim, dim);
  t.mut_out_b = Matrix(1, dim);
  return t;
}

bool ThetaParams::all_finite() const {
  for (const ThetaField& f : kFields) {
    if (!(this->*f.member).all_finite()) return false;
  }
  return true;
}

std::size_t ThetaParams::parameter_count() const {
  std::size_t n = 0;
  for (const ThetaField& f : kFields) n += (this->*f.member).size();
  return n;
}

std::size_t default_attention_dim(std::size_t dim) { return dim; }

std::size_t default_hidden_dim(std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("default_hidden_dim: dim must be positive");
  return std::bit_floor(dim);
}

ThetaParams init_theta(std::size_t dim, std::size_t attention_dim, std::size_t hidden_dim,
                       RngStream& rng) {
  ThetaParams t = ThetaParams::zeros(dim, attention_dim, hidden_dim);
  const double d = static_cast<double>(dim);
  const double dm = static_cast<double>(hidden_dim);
  fill_uniform(t.pop_query, d, rng);
  fill_uniform(t.pop_key, d, rng);
  fill_uniform(t.fit_query, 1.0, rng);
  fill_uniform(t.fit_key, 1.0, rng);
  fill_uniform(t.gene_query, 1.0, rng);
  fill_uniform(t.gene_key, 1.0, rng);
  fill_uniform(t.cross_hidden_w, d, rng);
  fill_uniform(t.cross_out_w, dm, rng);
  fill_uniform(t.mut_hidden_w, d, rng);
  fill_uniform(t.mut_out_w, dm, rng);
  // biases stay zero
  return t;
}

}  // namespace abom
