#include "abom/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace abom {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
}

}  // namespace

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw std::invalid_argument("from_rows: ragged rows");
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

bool Matrix::all_finite() const { return abom::all_finite(data_); }

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* o = out.row_data(i);
    const double* ar = a.row_data(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = ar[k];
      if (aik == 0.0) continue;
      const double* br = b.row_data(k);
      for (std::size_t j = 0; j < b.cols(); ++j) o[j] += aik * br[j];
    }
  }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_nt: inner dimensions differ");
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ar = a.row_data(i);
    double* o = out.row_data(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* br = b.row_data(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += ar[k] * br[k];
      o[j] = acc;
    }
  }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("matmul_tn: inner dimensions differ");
  Matrix out(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ar = a.row_data(i);
    const double* br = b.row_data(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = ar[k];
      if (aik == 0.0) continue;
      double* o = out.row_data(k);
      for (std::size_t j = 0; j < b.cols(); ++j) o[j] += aik * br[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  }
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "sub");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

Matrix scale(const Matrix& a, double s) {
  Matrix out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

void add_in_place(Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add_in_place");
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += b.data()[i];
}

void add_scaled_in_place(Matrix& a, const Matrix& b, double s) {
  require_same_shape(a, b, "add_scaled_in_place");
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += s * b.data()[i];
}

Matrix softmax_rows(const Matrix& scores) {
  if (scores.empty()) throw std::invalid_argument("softmax_rows: empty input");
  if (!scores.all_finite()) throw std::invalid_argument("softmax_rows: non-finite input");
  Matrix out(scores.rows(), scores.cols());
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    const double* s = scores.row_data(i);
    double* o = out.row_data(i);
    const double m = *std::max_element(s, s + scores.cols());
    double sum = 0.0;
    for (std::size_t j = 0; j < scores.cols(); ++j) {
      o[j] = std::exp(s[j] - m);
      sum += o[j];
    }
    const double inv = 1.0 / sum;
    for (std::size_t j = 0; j < scores.cols(); ++j) o[j] *= inv;
  }
  return out;
}

Matrix softmax_rows_backward(const Matrix& softmax_out, const Matrix& grad_out) {
  require_same_shape(softmax_out, grad_out, "softmax_rows_backward");
  Matrix out(softmax_out.rows(), softmax_out.cols());
  for (std::size_t i = 0; i < softmax_out.rows(); ++i) {
    const double* p = softmax_out.row_data(i);
    const double* g = grad_out.row_data(i);
    double* o = out.row_data(i);
    double dot = 0.0;
    for (std::size_t j = 0; j < softmax_out.cols(); ++j) dot += p[j] * g[j];
    for (std::size_t j = 0; j < softmax_out.cols(); ++j) o[j] = p[j] * (g[j] - dot);
  }
  return out;
}

namespace {
// A column counts as constant when its spread is negligible against its
// magnitude; z-scoring it would just amplify rounding noise.
bool column_is_degenerate(double stddev, double mean) {
  return stddev <= 1e-12 * std::max(1.0, std::abs(mean));
}
}  // namespace

ColumnStats standardize_columns(const Matrix& m) {
  ColumnStats st;
  st.values = Matrix(m.rows(), m.cols());
  st.mean.assign(m.cols(), 0.0);
  st.stddev.assign(m.cols(), 0.0);
  st.degenerate.assign(m.cols(), false);
  if (m.rows() == 0) return st;
  const double inv_n = 1.0 / static_cast<double>(m.rows());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double mu = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) mu += m(i, j);
    mu *= inv_n;
    double var = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const double c = m(i, j) - mu;
      var += c * c;
    }
    const double sd = std::sqrt(var * inv_n);
    st.mean[j] = mu;
    st.stddev[j] = sd;
    if (column_is_degenerate(sd, mu)) {
      st.degenerate[j] = true;
      continue;  // values stay zero
    }
    const double inv_sd = 1.0 / sd;
    for (std::size_t i = 0; i < m.rows(); ++i) st.values(i, j) = (m(i, j) - mu) * inv_sd;
  }
  return st;
}

Vector standardize_vector(const Vector& v) {
  Matrix column(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) column(i, 0) = v[i];
  const ColumnStats st = standardize_columns(column);
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = st.values(i, 0);
  return out;
}

}  // namespace abom
