#pragma once

// Reference implementations kept deliberately naive and written without
// looking at the library kernels, so agreement between the two is evidence
// rather than tautology.

#include <cmath>
#include <cstddef>
#include <vector>

#include "entail/tensor.hpp"

namespace oracle {

using entail::real;
using entail::Tensor2D;

/// Plain i-j-k triple loop (the library streams rows in i-k-j order).
inline Tensor2D matmul_ref(const Tensor2D& a, const Tensor2D& b) {
  Tensor2D c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      real acc = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      c(i, j) = acc;
    }
  return c;
}

inline real sigmoid_ref(real x) { return 1 / (1 + std::exp(-x)); }

/// One LSTM step for a single lane, everything scalar.  Weights follow the
/// library convention: input weight w is (e x d) applied as w^T x, recurrent
/// weight u is (d x d) applied as u^T h.
struct LstmCellRefOut {
  std::vector<real> h, c;
};

inline LstmCellRefOut lstm_cell_ref(
    const std::vector<real>& x, const std::vector<real>& h_prev,
    const std::vector<real>& c_prev, const Tensor2D& wi, const Tensor2D& ui,
    const std::vector<real>& bi, const Tensor2D& wf, const Tensor2D& uf,
    const std::vector<real>& bf, const Tensor2D& wo, const Tensor2D& uo,
    const std::vector<real>& bo, const Tensor2D& wg, const Tensor2D& ug,
    const std::vector<real>& bg) {
  const std::size_t e = x.size(), d = h_prev.size();
  auto pre = [&](const Tensor2D& w, const Tensor2D& u,
                 const std::vector<real>& b, std::size_t j) {
    real s = b[j];
    for (std::size_t k = 0; k < e; ++k) s += w(k, j) * x[k];
    for (std::size_t k = 0; k < d; ++k) s += u(k, j) * h_prev[k];
    return s;
  };
  LstmCellRefOut out;
  out.h.resize(d);
  out.c.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    const real i_g = sigmoid_ref(pre(wi, ui, bi, j));
    const real f_g = sigmoid_ref(pre(wf, uf, bf, j));
    const real o_g = sigmoid_ref(pre(wo, uo, bo, j));
    const real g_g = std::tanh(pre(wg, ug, bg, j));
    out.c[j] = f_g * c_prev[j] + i_g * g_g;
    out.h[j] = o_g * std::tanh(out.c[j]);
  }
  return out;
}

/// Mean over the first `len` columns of a (dim x L) matrix.
inline std::vector<real> mean_pool_ref(const Tensor2D& y_cols,
                                       std::size_t len) {
  std::vector<real> out(y_cols.rows(), 0);
  for (std::size_t t = 0; t < len; ++t)
    for (std::size_t k = 0; k < y_cols.rows(); ++k) out[k] += y_cols(k, t);
  for (real& v : out) v /= real(len);
  return out;
}

inline std::vector<real> softmax_ref(const std::vector<real>& v) {
  std::vector<real> out(v.size());
  real z = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i]);
    z += out[i];
  }
  for (real& x : out) x /= z;
  return out;
}

/// Attention for one sentence, materializing every intermediate of the
/// formula M = tanh(W_y Y + W_h r_ave 1^T), a = softmax(w^T M) over the
/// first `len` columns, r = Y a^T.  `y_cols` is (dim x L).
struct AttentionRefOut {
  std::vector<real> alpha;  // length L, zero past len
  std::vector<real> r_att;  // dim
};

inline AttentionRefOut attention_ref(const Tensor2D& y_cols, std::size_t len,
                                     const Tensor2D& w_y, const Tensor2D& w_h,
                                     const std::vector<real>& w) {
  const std::size_t dim = y_cols.rows();
  const std::size_t steps = y_cols.cols();
  const auto r_ave = mean_pool_ref(y_cols, len);

  // Explicit outer product r_ave * ones^T, added to W_y Y.
  Tensor2D shifted(dim, steps);
  for (std::size_t k = 0; k < dim; ++k) {
    std::vector<real> wh_r(1, 0);
    real s = 0;
    for (std::size_t l = 0; l < dim; ++l) s += w_h(k, l) * r_ave[l];
    for (std::size_t t = 0; t < steps; ++t) {
      real a = s;
      for (std::size_t l = 0; l < dim; ++l) a += w_y(k, l) * y_cols(l, t);
      shifted(k, t) = std::tanh(a);
    }
  }

  std::vector<real> logits(len);
  for (std::size_t t = 0; t < len; ++t) {
    real s = 0;
    for (std::size_t k = 0; k < dim; ++k) s += w[k] * shifted(k, t);
    logits[t] = s;
  }
  const auto alpha_real = softmax_ref(logits);

  AttentionRefOut out;
  out.alpha.assign(steps, 0);
  for (std::size_t t = 0; t < len; ++t) out.alpha[t] = alpha_real[t];
  out.r_att.assign(dim, 0);
  for (std::size_t t = 0; t < len; ++t)
    for (std::size_t k = 0; k < dim; ++k)
      out.r_att[k] += alpha_real[t] * y_cols(k, t);
  return out;
}

/// Matching layout per coordinate: [p; h; p*h; p-h].
inline std::vector<real> match_vectors_ref(const std::vector<real>& p,
                                           const std::vector<real>& h) {
  const std::size_t r = p.size();
  std::vector<real> out(4 * r);
  for (std::size_t k = 0; k < r; ++k) {
    out[k] = p[k];
    out[r + k] = h[k];
    out[2 * r + k] = p[k] * h[k];
    out[3 * r + k] = p[k] - h[k];
  }
  return out;
}

/// Scalar cross-entropy: softmax probabilities first, then -log p[gold],
/// averaged.
inline real cross_entropy_ref(const Tensor2D& logits,
                              const std::vector<std::int32_t>& labels) {
  real total = 0;
  for (std::size_t b = 0; b < logits.cols(); ++b) {
    std::vector<real> col(logits.rows());
    for (std::size_t c = 0; c < logits.rows(); ++c) col[c] = logits(c, b);
    const auto p = softmax_ref(col);
    total += -std::log(p[std::size_t(labels[b])]);
  }
  return total / real(logits.cols());
}

}  // namespace oracle
