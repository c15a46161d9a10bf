#include "entail/matcher.hpp"

#include "entail/error.hpp"

namespace entail {

Tensor2D match_vectors(const Tensor2D& r_premise,
                       const Tensor2D& r_hypothesis) {
  require_same_shape(r_premise, r_hypothesis, "match_vectors");
  const std::size_t r = r_premise.rows();
  const std::size_t batch = r_premise.cols();
  Tensor2D out(4 * r, batch);
  for (std::size_t k = 0; k < r; ++k) {
    for (std::size_t b = 0; b < batch; ++b) {
      const real p = r_premise(k, b);
      const real h = r_hypothesis(k, b);
      out(k, b) = p;
      out(r + k, b) = h;
      out(2 * r + k, b) = p * h;
      out(3 * r + k, b) = p - h;
    }
  }
  return out;
}

void match_vectors_backward(const Tensor2D& r_premise,
                            const Tensor2D& r_hypothesis,
                            const Tensor2D& d_match, Tensor2D& d_premise,
                            Tensor2D& d_hypothesis) {
  const std::size_t r = r_premise.rows();
  const std::size_t batch = r_premise.cols();
  if (d_match.rows() != 4 * r || d_match.cols() != batch)
    throw DimensionError("match_vectors_backward: gradient is " +
                         d_match.shape_str() + ", want " +
                         std::to_string(4 * r) + "x" + std::to_string(batch));
  for (std::size_t k = 0; k < r; ++k) {
    for (std::size_t b = 0; b < batch; ++b) {
      const real p = r_premise(k, b);
      const real h = r_hypothesis(k, b);
      const real d_cat_p = d_match(k, b);
      const real d_cat_h = d_match(r + k, b);
      const real d_prod = d_match(2 * r + k, b);
      const real d_diff = d_match(3 * r + k, b);
      d_premise(k, b) += d_cat_p + d_prod * h + d_diff;
      d_hypothesis(k, b) += d_cat_h + d_prod * p - d_diff;
    }
  }
}

MatchHeadParams make_match_head(ParameterStore& store,
                                const std::string& prefix, std::size_t in_dim,
                                std::size_t mid_dim, Rng& rng) {
  if (in_dim == 0 || mid_dim == 0)
    throw ArgumentError("make_match_head: dimensions must be positive");
  MatchHeadParams p;
  p.in_dim = in_dim;
  p.mid_dim = mid_dim;
  p.proj = &store.add(prefix + ".proj", mid_dim, in_dim);
  p.proj_b = &store.add(prefix + ".proj_b", mid_dim, 1);
  p.out = &store.add(prefix + ".out", 3, mid_dim);
  p.out_b = &store.add(prefix + ".out_b", 3, 1);
  rng.fill_uniform(p.proj->value, -0.08, 0.08);
  rng.fill_uniform(p.out->value, -0.08, 0.08);
  return p;
}

void match_head_forward(const MatchHeadParams& p, const Tensor2D& input,
                        bool train, real dropout_rate, Rng* rng,
                        MatchHeadCache& cache) {
  if (input.rows() != p.in_dim)
    throw DimensionError("match_head_forward: input is " + input.shape_str() +
                         ", want " + std::to_string(p.in_dim) + " rows");
  if (dropout_rate < 0 || dropout_rate >= 1)
    throw ArgumentError("match_head_forward: dropout rate must be in [0,1)");

  cache.input = input;
  cache.hidden = matmul(p.proj->value, input);
  add_col_broadcast(cache.hidden, p.proj_b->value);
  tanh_inplace(cache.hidden);

  if (train && dropout_rate > 0) {
    if (!rng)
      throw ArgumentError("match_head_forward: dropout needs an rng");
    const real keep = 1 - dropout_rate;
    cache.dropout_mask = Tensor2D(cache.hidden.rows(), cache.hidden.cols());
    for (real& v : cache.dropout_mask.raw())
      v = rng->unit() < keep ? real(1) / keep : real(0);
    cache.dropped = hadamard(cache.hidden, cache.dropout_mask);
  } else {
    cache.dropout_mask = Tensor2D();
    cache.dropped = cache.hidden;
  }

  cache.logits = matmul(p.out->value, cache.dropped);
  add_col_broadcast(cache.logits, p.out_b->value);
}

void match_head_backward(const MatchHeadParams& p, const MatchHeadCache& cache,
                         const Tensor2D& d_logits, Tensor2D& d_input) {
  require_same_shape(d_logits, cache.logits, "match_head_backward");

  add_matmul_nt(p.out->grad, d_logits, cache.dropped);
  add_inplace(p.out_b->grad, row_sum(d_logits));

  Tensor2D d_hidden = matmul_tn(p.out->value, d_logits);
  if (!cache.dropout_mask.empty())
    hadamard_inplace(d_hidden, cache.dropout_mask);

  // Through tanh.
  const real* ph = cache.hidden.data();
  real* pd = d_hidden.data();
  for (std::size_t i = 0; i < d_hidden.size(); ++i)
    pd[i] *= 1 - ph[i] * ph[i];

  add_matmul_nt(p.proj->grad, d_hidden, cache.input);
  add_inplace(p.proj_b->grad, row_sum(d_hidden));
  add_matmul_tn(d_input, p.proj->value, d_hidden);
}

}  // namespace entail
