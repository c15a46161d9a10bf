#pragma once

#include <cstdint>
#include <string>

#include "entail/param.hpp"
#include "entail/rng.hpp"
#include "entail/tensor.hpp"

namespace entail {

/// Stacks two sentence representations (r x B each) into the 4r x B matching
/// input: [premise; hypothesis; elementwise product; difference], in that
/// row order.
Tensor2D match_vectors(const Tensor2D& r_premise, const Tensor2D& r_hypothesis);

/// Accumulates gradients of the two representations given the gradient of
/// the stacked matching input.
void match_vectors_backward(const Tensor2D& r_premise,
                            const Tensor2D& r_hypothesis,
                            const Tensor2D& d_match, Tensor2D& d_premise,
                            Tensor2D& d_hypothesis);

/// Three-way classifier over the matching input: tanh projection to
/// `mid_dim`, inverted dropout during training, then an affine map to the
/// three label logits.
struct MatchHeadParams {
  Parameter* proj = nullptr;    // mid_dim x in_dim
  Parameter* proj_b = nullptr;  // mid_dim x 1
  Parameter* out = nullptr;     // 3 x mid_dim
  Parameter* out_b = nullptr;   // 3 x 1
  std::size_t in_dim = 0;
  std::size_t mid_dim = 0;
};

MatchHeadParams make_match_head(ParameterStore& store,
                                const std::string& prefix, std::size_t in_dim,
                                std::size_t mid_dim, Rng& rng);

struct MatchHeadCache {
  Tensor2D input;         // in_dim x B
  Tensor2D hidden;        // mid_dim x B, after tanh
  Tensor2D dropout_mask;  // mid_dim x B; empty when dropout was not applied
  Tensor2D dropped;       // hidden after dropout (aliases hidden when off)
  Tensor2D logits;        // 3 x B
};

/// Computes label logits.  When `train` is true and `dropout_rate` > 0 the
/// kept units are scaled by 1/(1-rate) so inference needs no rescaling; in
/// that case `rng` must be non-null.  Evaluation passes train=false and the
/// hidden layer flows through unchanged.
void match_head_forward(const MatchHeadParams& p, const Tensor2D& input,
                        bool train, real dropout_rate, Rng* rng,
                        MatchHeadCache& cache);

/// Accumulates parameter gradients and the gradient of the matching input.
void match_head_backward(const MatchHeadParams& p, const MatchHeadCache& cache,
                         const Tensor2D& d_logits, Tensor2D& d_input);

}  // namespace entail
