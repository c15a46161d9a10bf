#include "entail/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace entail {

void require_same_shape(const Tensor2D& a, const Tensor2D& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_str() +
                         " vs " + b.shape_str());
  }
}

bool all_finite(const Tensor2D& t) {
  for (real v : t.raw()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void check_finite(const Tensor2D& t, const std::string& context) {
  const auto& d = t.raw();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d[i])) {
      throw NumericError(context + ": non-finite value at (" +
                         std::to_string(i / t.cols()) + "," +
                         std::to_string(i % t.cols()) + ")");
    }
  }
}

Tensor2D matmul(const Tensor2D& a, const Tensor2D& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ, " + a.shape_str() +
                         " * " + b.shape_str());
  }
  Tensor2D c(a.rows(), b.cols());
  add_matmul(c, a, b);
  return c;
}

void add_matmul(Tensor2D& c, const Tensor2D& a, const Tensor2D& b) {
  if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols()) {
    throw DimensionError("add_matmul: shape mismatch " + a.shape_str() + " * " +
                         b.shape_str() + " -> " + c.shape_str());
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    const real* arow = a.row(i);
    real* crow = c.row(i);
    for (std::size_t l = 0; l < k; ++l) {
      const real av = arow[l];
      const real* brow = b.row(l);
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

Tensor2D matmul_tn(const Tensor2D& a, const Tensor2D& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("matmul_tn: inner dimensions differ, " +
                         a.shape_str() + "^T * " + b.shape_str());
  }
  const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
  Tensor2D c(m, n);
  for (std::size_t l = 0; l < k; ++l) {
    const real* arow = a.row(l);
    const real* brow = b.row(l);
    for (std::size_t i = 0; i < m; ++i) {
      const real av = arow[i];
      real* crow = c.row(i);
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

void add_matmul_tn(Tensor2D& c, const Tensor2D& a, const Tensor2D& b) {
  if (a.rows() != b.rows() || c.rows() != a.cols() || c.cols() != b.cols()) {
    throw DimensionError("add_matmul_tn: shape mismatch " + a.shape_str() +
                         "^T * " + b.shape_str() + " -> " + c.shape_str());
  }
  const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
  for (std::size_t l = 0; l < k; ++l) {
    const real* arow = a.row(l);
    const real* brow = b.row(l);
    for (std::size_t i = 0; i < m; ++i) {
      const real av = arow[i];
      real* crow = c.row(i);
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

Tensor2D matmul_nt(const Tensor2D& a, const Tensor2D& b) {
  Tensor2D c(a.rows(), b.rows());
  add_matmul_nt(c, a, b);
  return c;
}

void add_matmul_nt(Tensor2D& c, const Tensor2D& a, const Tensor2D& b) {
  if (a.cols() != b.cols() || c.rows() != a.rows() || c.cols() != b.rows()) {
    throw DimensionError("add_matmul_nt: shape mismatch " + a.shape_str() +
                         " * " + b.shape_str() + "^T -> " + c.shape_str());
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  for (std::size_t i = 0; i < m; ++i) {
    const real* arow = a.row(i);
    real* crow = c.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const real* brow = b.row(j);
      real acc = 0;
      for (std::size_t l = 0; l < k; ++l) acc += arow[l] * brow[l];
      crow[j] += acc;
    }
  }
}

namespace {

template <class F>
Tensor2D binary_op(const Tensor2D& a, const Tensor2D& b, const char* name, F f) {
  require_same_shape(a, b, name);
  Tensor2D c(a.rows(), a.cols());
  const real* pa = a.data();
  const real* pb = b.data();
  real* pc = c.data();
  for (std::size_t i = 0; i < a.size(); ++i) pc[i] = f(pa[i], pb[i]);
  return c;
}

template <class F>
Tensor2D unary_op(const Tensor2D& a, F f) {
  Tensor2D c(a.rows(), a.cols());
  const real* pa = a.data();
  real* pc = c.data();
  for (std::size_t i = 0; i < a.size(); ++i) pc[i] = f(pa[i]);
  return c;
}

}  // namespace

Tensor2D add(const Tensor2D& a, const Tensor2D& b) {
  return binary_op(a, b, "add", [](real x, real y) { return x + y; });
}

Tensor2D sub(const Tensor2D& a, const Tensor2D& b) {
  return binary_op(a, b, "sub", [](real x, real y) { return x - y; });
}

Tensor2D hadamard(const Tensor2D& a, const Tensor2D& b) {
  return binary_op(a, b, "hadamard", [](real x, real y) { return x * y; });
}

Tensor2D tanh_map(const Tensor2D& a) {
  return unary_op(a, [](real x) { return std::tanh(x); });
}

Tensor2D sigmoid_map(const Tensor2D& a) {
  return unary_op(a, [](real x) {
    // Evaluated through exp(-|x|) so neither branch can overflow.
    if (x >= 0) {
      const real z = std::exp(-x);
      return real(1) / (real(1) + z);
    }
    const real z = std::exp(x);
    return z / (real(1) + z);
  });
}

Tensor2D scale(const Tensor2D& a, real s) {
  return unary_op(a, [s](real x) { return x * s; });
}

Tensor2D transpose(const Tensor2D& a) {
  Tensor2D c(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(j, i) = a(i, j);
  return c;
}

void tanh_inplace(Tensor2D& a) {
  for (real& v : a.raw()) v = std::tanh(v);
}

void add_inplace(Tensor2D& a, const Tensor2D& b) {
  require_same_shape(a, b, "add_inplace");
  real* pa = a.data();
  const real* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) pa[i] += pb[i];
}

void sub_inplace(Tensor2D& a, const Tensor2D& b) {
  require_same_shape(a, b, "sub_inplace");
  real* pa = a.data();
  const real* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) pa[i] -= pb[i];
}

void hadamard_inplace(Tensor2D& a, const Tensor2D& b) {
  require_same_shape(a, b, "hadamard_inplace");
  real* pa = a.data();
  const real* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) pa[i] *= pb[i];
}

void axpy(Tensor2D& y, real a, const Tensor2D& x) {
  require_same_shape(y, x, "axpy");
  real* py = y.data();
  const real* px = x.data();
  for (std::size_t i = 0; i < y.size(); ++i) py[i] += a * px[i];
}

void scale_inplace(Tensor2D& a, real s) {
  for (real& v : a.raw()) v *= s;
}

void add_col_broadcast(Tensor2D& a, const Tensor2D& b) {
  if (b.cols() != 1 || b.rows() != a.rows()) {
    throw DimensionError("add_col_broadcast: expected " +
                         std::to_string(a.rows()) + "x1 bias, got " +
                         b.shape_str());
  }
  for (std::size_t i = 0; i < a.rows(); ++i) {
    real* arow = a.row(i);
    const real bv = b(i, 0);
    for (std::size_t j = 0; j < a.cols(); ++j) arow[j] += bv;
  }
}

void mul_row_broadcast(Tensor2D& a, const Tensor2D& r) {
  if (r.rows() != 1 || r.cols() != a.cols()) {
    throw DimensionError("mul_row_broadcast: expected 1x" +
                         std::to_string(a.cols()) + " row, got " +
                         r.shape_str());
  }
  const real* pr = r.data();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    real* arow = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) arow[j] *= pr[j];
  }
}

Tensor2D row_sum(const Tensor2D& a) {
  Tensor2D c(a.rows(), 1);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const real* arow = a.row(i);
    real acc = 0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += arow[j];
    c(i, 0) = acc;
  }
  return c;
}

real sum(const Tensor2D& a) {
  real acc = 0;
  for (real v : a.raw()) acc += v;
  return acc;
}

real squared_norm(const Tensor2D& a) {
  real acc = 0;
  for (real v : a.raw()) acc += v * v;
  return acc;
}

real max_abs_diff(const Tensor2D& a, const Tensor2D& b) {
  require_same_shape(a, b, "max_abs_diff");
  real m = 0;
  const real* pa = a.data();
  const real* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(pa[i] - pb[i]));
  return m;
}

std::vector<real> softmax(const std::vector<real>& v) {
  if (v.empty()) throw ArgumentError("softmax: empty input");
  real mx = v[0];
  for (real x : v) {
    if (!std::isfinite(x)) throw ArgumentError("softmax: non-finite input");
    mx = std::max(mx, x);
  }
  std::vector<real> out(v.size());
  real total = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - mx);
    total += out[i];
  }
  for (real& x : out) x /= total;
  return out;
}

}  // namespace entail
