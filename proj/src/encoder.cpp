#include "entail/encoder.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "entail/error.hpp"

namespace entail {

AttentionParams make_attention_params(ParameterStore& store,
                                      const std::string& prefix,
                                      std::size_t dim, Rng& rng) {
  if (dim == 0) throw ArgumentError("attention dim must be positive");
  AttentionParams p;
  p.dim = dim;
  p.w_y = &store.add(prefix + ".w_y", dim, dim);
  p.w_h = &store.add(prefix + ".w_h", dim, dim);
  p.w = &store.add(prefix + ".w", dim, 1);
  rng.fill_uniform(p.w_y->value, -0.08, 0.08);
  rng.fill_uniform(p.w_h->value, -0.08, 0.08);
  rng.fill_uniform(p.w->value, -0.08, 0.08);
  return p;
}

Tensor2D mean_pool(const std::vector<Tensor2D>& y, const Tensor2D& step_mask,
                   Tensor2D& inv_len) {
  if (y.empty()) throw ArgumentError("mean_pool: no steps");
  const std::size_t steps = y.size();
  const std::size_t dim = y[0].rows();
  const std::size_t batch = y[0].cols();
  if (step_mask.rows() != steps || step_mask.cols() != batch)
    throw DimensionError("mean_pool: mask is " + step_mask.shape_str() +
                         ", want " + std::to_string(steps) + "x" +
                         std::to_string(batch));

  inv_len = Tensor2D(1, batch);
  for (std::size_t b = 0; b < batch; ++b) {
    real len = 0;
    for (std::size_t t = 0; t < steps; ++t) len += step_mask(t, b);
    if (len <= 0)
      throw ArgumentError("mean_pool: lane " + std::to_string(b) +
                          " has no real steps");
    inv_len(0, b) = real(1) / len;
  }

  Tensor2D r_ave(dim, batch);
  for (std::size_t t = 0; t < steps; ++t) add_inplace(r_ave, y[t]);
  mul_row_broadcast(r_ave, inv_len);
  return r_ave;
}

void mean_pool_backward(const Tensor2D& d_r_ave, const Tensor2D& step_mask,
                        const Tensor2D& inv_len, std::vector<Tensor2D>& d_y) {
  const std::size_t steps = d_y.size();
  const std::size_t dim = d_r_ave.rows();
  const std::size_t batch = d_r_ave.cols();
  for (std::size_t t = 0; t < steps; ++t) {
    Tensor2D& dst = d_y[t];
    for (std::size_t b = 0; b < batch; ++b) {
      const real w = step_mask(t, b) * inv_len(0, b);
      if (w == 0) continue;
      for (std::size_t k = 0; k < dim; ++k) dst(k, b) += w * d_r_ave(k, b);
    }
  }
}

void inner_attention_forward(const AttentionParams& p,
                             const std::vector<Tensor2D>& y,
                             const Tensor2D& r_ave, const Tensor2D& step_mask,
                             AttentionCache& cache) {
  const std::size_t steps = y.size();
  const std::size_t dim = p.dim;
  const std::size_t batch = r_ave.cols();
  if (r_ave.rows() != dim)
    throw DimensionError("inner_attention: pooled vector is " +
                         r_ave.shape_str() + ", want " + std::to_string(dim) +
                         " rows");

  // The pooled term is identical for every step, so it is projected once
  // and added to each step's projection.
  Tensor2D shift = matmul(p.w_h->value, r_ave);

  cache.m.clear();
  cache.m.reserve(steps);
  cache.logits = Tensor2D(steps, batch);
  for (std::size_t t = 0; t < steps; ++t) {
    Tensor2D a = matmul(p.w_y->value, y[t]);
    add_inplace(a, shift);
    tanh_inplace(a);
    for (std::size_t b = 0; b < batch; ++b) {
      real s = 0;
      for (std::size_t k = 0; k < dim; ++k) s += p.w->value(k, 0) * a(k, b);
      cache.logits(t, b) = s;
    }
    cache.m.push_back(std::move(a));
  }

  // Softmax over the real steps of each lane; padded steps get weight 0.
  cache.alpha = Tensor2D(steps, batch);
  for (std::size_t b = 0; b < batch; ++b) {
    real hi = -std::numeric_limits<real>::infinity();
    for (std::size_t t = 0; t < steps; ++t)
      if (step_mask(t, b) != 0 && cache.logits(t, b) > hi)
        hi = cache.logits(t, b);
    real z = 0;
    for (std::size_t t = 0; t < steps; ++t) {
      if (step_mask(t, b) == 0) continue;
      const real e = std::exp(cache.logits(t, b) - hi);
      cache.alpha(t, b) = e;
      z += e;
    }
    for (std::size_t t = 0; t < steps; ++t) cache.alpha(t, b) /= z;
  }

  cache.r_att = Tensor2D(dim, batch);
  for (std::size_t t = 0; t < steps; ++t) {
    const Tensor2D& yt = y[t];
    for (std::size_t b = 0; b < batch; ++b) {
      const real a = cache.alpha(t, b);
      if (a == 0) continue;
      for (std::size_t k = 0; k < dim; ++k)
        cache.r_att(k, b) += a * yt(k, b);
    }
  }
}

void inner_attention_backward(const AttentionParams& p,
                              const std::vector<Tensor2D>& y,
                              const Tensor2D& r_ave,
                              const Tensor2D& step_mask,
                              const AttentionCache& cache,
                              const Tensor2D& d_r_att,
                              std::vector<Tensor2D>& d_y, Tensor2D& d_r_ave) {
  const std::size_t steps = y.size();
  const std::size_t dim = p.dim;
  const std::size_t batch = r_ave.cols();

  // Through the weighted sum: d_alpha and the direct path into y.
  Tensor2D d_alpha(steps, batch);
  for (std::size_t t = 0; t < steps; ++t) {
    const Tensor2D& yt = y[t];
    Tensor2D& dyt = d_y[t];
    for (std::size_t b = 0; b < batch; ++b) {
      const real a = cache.alpha(t, b);
      real dot = 0;
      for (std::size_t k = 0; k < dim; ++k) {
        dot += d_r_att(k, b) * yt(k, b);
        dyt(k, b) += a * d_r_att(k, b);
      }
      d_alpha(t, b) = dot;
    }
  }

  // Softmax backward per lane; padded steps have alpha 0 and drop out.
  Tensor2D d_logits(steps, batch);
  for (std::size_t b = 0; b < batch; ++b) {
    real mix = 0;
    for (std::size_t t = 0; t < steps; ++t)
      mix += cache.alpha(t, b) * d_alpha(t, b);
    for (std::size_t t = 0; t < steps; ++t)
      d_logits(t, b) = cache.alpha(t, b) * (d_alpha(t, b) - mix);
  }

  Tensor2D d_shift(dim, batch);
  Tensor2D d_a(dim, batch);
  for (std::size_t t = 0; t < steps; ++t) {
    const Tensor2D& mt = cache.m[t];
    // d_m = w * d_logits_t, then through tanh.
    for (std::size_t b = 0; b < batch; ++b) {
      const real dl = d_logits(t, b);
      for (std::size_t k = 0; k < dim; ++k) {
        const real m = mt(k, b);
        d_a(k, b) = p.w->value(k, 0) * dl * (1 - m * m);
      }
    }
    // d_w accumulates m_t scaled by the step's logit gradients.
    for (std::size_t b = 0; b < batch; ++b) {
      const real dl = d_logits(t, b);
      if (dl == 0) continue;
      for (std::size_t k = 0; k < dim; ++k)
        p.w->grad(k, 0) += mt(k, b) * dl;
    }
    add_matmul_nt(p.w_y->grad, d_a, y[t]);
    add_matmul_tn(d_y[t], p.w_y->value, d_a);
    add_inplace(d_shift, d_a);
  }
  (void)step_mask;

  add_matmul_nt(p.w_h->grad, d_shift, r_ave);
  add_matmul_tn(d_r_ave, p.w_h->value, d_shift);
}

EncoderParams make_encoder_params(ParameterStore& store,
                                  const std::string& prefix,
                                  std::size_t embed_dim,
                                  std::size_t hidden_dim, bool attention,
                                  Rng& rng) {
  EncoderParams p;
  p.embed_dim = embed_dim;
  p.hidden_dim = hidden_dim;
  p.attention = attention;
  p.fwd = make_lstm_params(store, prefix + ".fwd", embed_dim, hidden_dim, rng);
  p.bwd = make_lstm_params(store, prefix + ".bwd", embed_dim, hidden_dim, rng);
  if (attention)
    p.attn = make_attention_params(store, prefix + ".attn", 2 * hidden_dim, rng);
  return p;
}

void encode_batch(const EncoderParams& p, const Tensor2D& embeddings,
                  const IndexMatrix& tokens,
                  const std::vector<std::int32_t>& lengths, EncodeCache& out) {
  const std::size_t batch = tokens.rows;
  const std::size_t steps = tokens.cols;
  if (batch == 0 || steps == 0)
    throw ArgumentError("encode_batch: empty batch");
  if (lengths.size() != batch)
    throw ArgumentError("encode_batch: " + std::to_string(lengths.size()) +
                        " lengths for " + std::to_string(batch) + " rows");
  if (embeddings.cols() != p.embed_dim)
    throw DimensionError("encode_batch: embedding table is " +
                         embeddings.shape_str() + ", want " +
                         std::to_string(p.embed_dim) + " columns");

  out.attention = p.attention;
  out.step_mask = Tensor2D(steps, batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::int32_t len = lengths[b];
    if (len < 1 || std::size_t(len) > steps)
      throw ArgumentError("encode_batch: row " + std::to_string(b) +
                          " has length " + std::to_string(len));
    for (std::size_t t = 0; t < std::size_t(len); ++t)
      out.step_mask(t, b) = 1;
  }

  out.x_steps.assign(steps, Tensor2D(p.embed_dim, batch));
  const std::int64_t vocab = std::int64_t(embeddings.rows());
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < steps; ++t) {
      const std::int32_t idx = tokens.at(b, t);
      if (idx < 0 || idx >= vocab)
        throw DataError("token index " + std::to_string(idx) + " at row " +
                        std::to_string(b) + " position " + std::to_string(t) +
                        " is outside the embedding table");
      Tensor2D& xt = out.x_steps[t];
      for (std::size_t k = 0; k < p.embed_dim; ++k)
        xt(k, b) = embeddings(std::size_t(idx), k);
    }
  }

  bilstm_forward(p.fwd, p.bwd, out.x_steps, out.step_mask, out.lstm);
  out.r_ave = mean_pool(out.lstm.y, out.step_mask, out.inv_len);
  if (p.attention)
    inner_attention_forward(p.attn, out.lstm.y, out.r_ave, out.step_mask,
                            out.attn);
}

void encode_batch_backward(const EncoderParams& p, const EncodeCache& cache,
                           const Tensor2D& d_rep) {
  const std::size_t steps = cache.lstm.y.size();
  const std::size_t dim = 2 * p.hidden_dim;
  const std::size_t batch = cache.r_ave.cols();
  require_same_shape(d_rep, cache.r_ave, "encode_batch_backward");

  std::vector<Tensor2D> d_y(steps, Tensor2D(dim, batch));
  Tensor2D d_r_ave(dim, batch);
  if (p.attention) {
    inner_attention_backward(p.attn, cache.lstm.y, cache.r_ave,
                             cache.step_mask, cache.attn, d_rep, d_y,
                             d_r_ave);
  } else {
    add_inplace(d_r_ave, d_rep);
  }
  mean_pool_backward(d_r_ave, cache.step_mask, cache.inv_len, d_y);
  bilstm_backward(p.fwd, p.bwd, cache.lstm, cache.step_mask, d_y, nullptr);
}

EncodedSentence encode_sentence(const EncoderParams& p,
                                const Tensor2D& embeddings,
                                const std::vector<std::int32_t>& tokens) {
  if (tokens.empty()) throw ArgumentError("encode_sentence: no tokens");
  const std::size_t steps = tokens.size();
  IndexMatrix mat(1, steps);
  for (std::size_t t = 0; t < steps; ++t) mat.at(0, t) = tokens[t];

  EncodeCache cache;
  encode_batch(p, embeddings, mat, {std::int32_t(steps)}, cache);

  const std::size_t dim = 2 * p.hidden_dim;
  EncodedSentence enc;
  enc.outputs = Tensor2D(dim, steps);
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t k = 0; k < dim; ++k)
      enc.outputs(k, t) = cache.lstm.y[t](k, 0);
  enc.r_ave.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) enc.r_ave[k] = cache.r_ave(k, 0);
  if (p.attention) {
    enc.r_att.resize(dim);
    for (std::size_t k = 0; k < dim; ++k)
      enc.r_att[k] = cache.attn.r_att(k, 0);
    enc.alpha.resize(steps);
    for (std::size_t t = 0; t < steps; ++t)
      enc.alpha[t] = cache.attn.alpha(t, 0);
    enc.rep = enc.r_att;
  } else {
    enc.rep = enc.r_ave;
  }
  return enc;
}

}  // namespace entail
