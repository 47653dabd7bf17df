#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace abom {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles. Small sizes only (populations and
// parameter blocks), so storage is a flat std::vector and the arithmetic
// helpers below are plain loops.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* row_data(std::size_t r) { return data_.data() + r * cols_; }
  const double* row_data(std::size_t r) const { return data_.data() + r * cols_; }
  std::span<double> row(std::size_t r) { return {row_data(r), cols_}; }
  std::span<const double> row(std::size_t r) const { return {row_data(r), cols_}; }

  Vector& data() { return data_; }
  const Vector& data() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

// a * b; throws std::invalid_argument on shape mismatch.
Matrix matmul(const Matrix& a, const Matrix& b);
// a * b^T without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// a^T * b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
void add_in_place(Matrix& a, const Matrix& b);
void add_scaled_in_place(Matrix& a, const Matrix& b, double s);

// Row-wise softmax with max-subtraction stabilization. Every output row sums
// to 1; throws std::invalid_argument if the input is empty or non-finite.
Matrix softmax_rows(const Matrix& scores);

// Adjoint of softmax_rows: given the forward output and the gradient with
// respect to it, returns the gradient with respect to the scores.
Matrix softmax_rows_backward(const Matrix& softmax_out, const Matrix& grad_out);

// Column z-score normalization (biased stddev). Columns whose spread is
// negligible relative to their mean are mapped to all zeros and flagged in
// `degenerate`.
struct ColumnStats {
  Matrix values;
  Vector mean;
  Vector stddev;
  std::vector<bool> degenerate;
};
ColumnStats standardize_columns(const Matrix& m);

// z-score of a vector; a near-constant vector maps to all zeros.
Vector standardize_vector(const Vector& v);

bool all_finite(std::span<const double> v);

}  // namespace abom
