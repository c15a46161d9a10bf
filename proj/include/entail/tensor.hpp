#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "entail/error.hpp"

namespace entail {

#ifdef ENTAIL_REAL32
using real = float;
#else
using real = double;
#endif

/// Dense row-major matrix of reals. The universal value carrier: weight
/// matrices, batched activations (one column per batch lane), and vectors
/// (single-column or single-row tensors).
class Tensor2D {
 public:
  Tensor2D() = default;
  Tensor2D(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, real(0)) {
    if (rows == 0 || cols == 0) {
      throw ArgumentError("Tensor2D: dimensions must be positive, got " +
                          shape_str());
    }
  }
  Tensor2D(std::size_t rows, std::size_t cols, std::vector<real> values)
      : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (rows == 0 || cols == 0 || data_.size() != rows * cols) {
      throw ArgumentError("Tensor2D: data length " +
                          std::to_string(data_.size()) +
                          " does not match shape " + shape_str());
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  real& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  real operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  real* data() { return data_.data(); }
  const real* data() const { return data_.data(); }
  std::vector<real>& raw() { return data_; }
  const std::vector<real>& raw() const { return data_; }

  real* row(std::size_t r) { return data_.data() + r * cols_; }
  const real* row(std::size_t r) const { return data_.data() + r * cols_; }

  void fill(real v) { std::fill(data_.begin(), data_.end(), v); }
  void zero() { fill(real(0)); }

  std::string shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

  bool same_shape(const Tensor2D& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<real> data_;
};

// ---- shape helpers ----

void require_same_shape(const Tensor2D& a, const Tensor2D& b, const char* op);

/// Throws NumericError naming the first non-finite coordinate.
void check_finite(const Tensor2D& t, const std::string& context);
bool all_finite(const Tensor2D& t);

// ---- matrix products ----

/// C = A * B. Shapes (m x k) * (k x n) -> (m x n).
Tensor2D matmul(const Tensor2D& a, const Tensor2D& b);
/// C = A^T * B. Shapes (k x m) * (k x n) -> (m x n).
Tensor2D matmul_tn(const Tensor2D& a, const Tensor2D& b);
/// C = A * B^T. Shapes (m x k) * (n x k) -> (m x n).
Tensor2D matmul_nt(const Tensor2D& a, const Tensor2D& b);
/// C += A * B^T, used by gradient accumulation.
void add_matmul_nt(Tensor2D& c, const Tensor2D& a, const Tensor2D& b);
/// C += A^T * B.
void add_matmul_tn(Tensor2D& c, const Tensor2D& a, const Tensor2D& b);
/// C += A * B.
void add_matmul(Tensor2D& c, const Tensor2D& a, const Tensor2D& b);

// ---- elementwise ----

Tensor2D add(const Tensor2D& a, const Tensor2D& b);
Tensor2D sub(const Tensor2D& a, const Tensor2D& b);
Tensor2D hadamard(const Tensor2D& a, const Tensor2D& b);
Tensor2D tanh_map(const Tensor2D& a);
Tensor2D sigmoid_map(const Tensor2D& a);
Tensor2D scale(const Tensor2D& a, real s);
Tensor2D transpose(const Tensor2D& a);

void tanh_inplace(Tensor2D& a);
void add_inplace(Tensor2D& a, const Tensor2D& b);        // a += b
void sub_inplace(Tensor2D& a, const Tensor2D& b);        // a -= b
void hadamard_inplace(Tensor2D& a, const Tensor2D& b);   // a = a .* b
void axpy(Tensor2D& y, real a, const Tensor2D& x);       // y += a * x
void scale_inplace(Tensor2D& a, real s);

/// Adds column vector b (d x 1) to every column of a (d x n).
void add_col_broadcast(Tensor2D& a, const Tensor2D& b);
/// Multiplies every row of a (d x n) elementwise by row vector r (1 x n).
void mul_row_broadcast(Tensor2D& a, const Tensor2D& r);
/// Column vector (d x 1) holding the sum of each row of a.
Tensor2D row_sum(const Tensor2D& a);

real sum(const Tensor2D& a);
real squared_norm(const Tensor2D& a);
real max_abs_diff(const Tensor2D& a, const Tensor2D& b);

// ---- softmax ----

/// Max-shifted softmax of a non-empty finite vector: nonnegative outputs
/// summing to 1, invariant to adding a constant to every input.
std::vector<real> softmax(const std::vector<real>& v);

}  // namespace entail
