#pragma once

#include <vector>

#include "entail/index_matrix.hpp"
#include "entail/lstm.hpp"
#include "entail/param.hpp"
#include "entail/rng.hpp"
#include "entail/tensor.hpp"

namespace entail {

/// Parameters of the inner-attention stage over a biLSTM output of width
/// `dim` (= 2 * hidden size).  All three tensors are square in `dim` except
/// the scoring vector `w`, which is a column.
struct AttentionParams {
  Parameter* w_y = nullptr;  // dim x dim, applied to each output column
  Parameter* w_h = nullptr;  // dim x dim, applied to the mean-pooled vector
  Parameter* w = nullptr;    // dim x 1, scores each attention column
  std::size_t dim = 0;
};

AttentionParams make_attention_params(ParameterStore& store,
                                      const std::string& prefix,
                                      std::size_t dim, Rng& rng);

/// Forward state kept by the attention stage for its backward pass.
struct AttentionCache {
  std::vector<Tensor2D> m;  // per step: dim x B, tanh projection
  Tensor2D logits;          // L x B, pre-softmax scores
  Tensor2D alpha;           // L x B, masked softmax over steps
  Tensor2D r_att;           // dim x B, attention-weighted sum of outputs
};

/// Mean over the real (unmasked) steps of `y`, one column per batch lane.
/// Writes 1/length per lane into `inv_len` (1 x B).  Padded columns of `y`
/// must already be zero, which bilstm_forward guarantees.
Tensor2D mean_pool(const std::vector<Tensor2D>& y, const Tensor2D& step_mask,
                   Tensor2D& inv_len);

/// Accumulates d(loss)/d(y_t) given d(loss)/d(r_ave).
void mean_pool_backward(const Tensor2D& d_r_ave, const Tensor2D& step_mask,
                        const Tensor2D& inv_len, std::vector<Tensor2D>& d_y);

/// Attention over the step outputs: each step column is projected with w_y,
/// shifted by w_h applied to the pooled vector, squashed with tanh, and
/// scored against w; the scores are softmax-normalized over the real steps
/// of each lane and used to reweight the outputs.
void inner_attention_forward(const AttentionParams& p,
                             const std::vector<Tensor2D>& y,
                             const Tensor2D& r_ave, const Tensor2D& step_mask,
                             AttentionCache& cache);

/// Accumulates gradients into the attention parameters, `d_y` and `d_r_ave`.
void inner_attention_backward(const AttentionParams& p,
                              const std::vector<Tensor2D>& y,
                              const Tensor2D& r_ave,
                              const Tensor2D& step_mask,
                              const AttentionCache& cache,
                              const Tensor2D& d_r_att,
                              std::vector<Tensor2D>& d_y, Tensor2D& d_r_ave);

/// Full sentence encoder: embedding lookup, biLSTM, mean pooling, and
/// (optionally) inner attention.  With attention enabled the sentence
/// representation is the attention-weighted sum; otherwise it is the mean.
struct EncoderParams {
  LstmParams fwd;
  LstmParams bwd;
  AttentionParams attn;  // unused when attention is false
  bool attention = false;
  std::size_t embed_dim = 0;
  std::size_t hidden_dim = 0;
};

EncoderParams make_encoder_params(ParameterStore& store,
                                  const std::string& prefix,
                                  std::size_t embed_dim,
                                  std::size_t hidden_dim, bool attention,
                                  Rng& rng);

struct EncodeCache {
  std::vector<Tensor2D> x_steps;  // per step: e x B embedding columns
  Tensor2D step_mask;             // L x B, 1 for real tokens
  Tensor2D inv_len;               // 1 x B
  BiLstmCache lstm;
  Tensor2D r_ave;  // 2d x B
  AttentionCache attn;
  bool attention = false;

  /// The representation fed downstream: r_att with attention on, else r_ave.
  const Tensor2D& rep() const { return attention ? attn.r_att : r_ave; }
};

/// Encodes a padded batch of token rows.  `tokens` is B x L with pad index 0
/// past each lane's length; `lengths[b]` gives the number of real tokens and
/// must be at least 1.  Throws DataError when an index falls outside the
/// embedding table, naming the offending row and position.
void encode_batch(const EncoderParams& p, const Tensor2D& embeddings,
                  const IndexMatrix& tokens,
                  const std::vector<std::int32_t>& lengths, EncodeCache& out);

/// Accumulates parameter gradients given d(loss)/d(rep).  The embedding
/// table is frozen, so no gradient flows into it.
void encode_batch_backward(const EncoderParams& p, const EncodeCache& cache,
                           const Tensor2D& d_rep);

/// Single-sentence encoding with per-token detail, for inspection and
/// attention visualization.
struct EncodedSentence {
  Tensor2D outputs;          // 2d x L biLSTM output columns
  std::vector<real> r_ave;   // 2d
  std::vector<real> r_att;   // 2d, empty when attention is off
  std::vector<real> alpha;   // L, empty when attention is off
  std::vector<real> rep;     // the downstream representation
};

EncodedSentence encode_sentence(const EncoderParams& p,
                                const Tensor2D& embeddings,
                                const std::vector<std::int32_t>& tokens);

}  // namespace entail
