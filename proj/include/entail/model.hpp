#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entail/data.hpp"
#include "entail/encoder.hpp"
#include "entail/matcher.hpp"
#include "entail/param.hpp"
#include "entail/rng.hpp"
#include "entail/tensor.hpp"

namespace entail {

struct ModelConfig {
  std::size_t embed_dim = 300;
  std::size_t hidden_dim = 300;  // per direction
  std::size_t proj_dim = 0;      // 0 picks hidden_dim
  bool attention = true;
  real dropout = 0.25;
  std::uint64_t seed = 42;

  std::size_t resolved_proj() const {
    return proj_dim == 0 ? hidden_dim : proj_dim;
  }
  void validate() const;
};

/// Mean of -log p[gold] over the batch, fused from logits (3 x B, one
/// column per example) through log-sum-exp so tiny probabilities never hit
/// log(0).  When `d_logits` is non-null it receives
/// (softmax(logits) - onehot(gold)) / B.
real cross_entropy_from_logits(const Tensor2D& logits,
                               const std::vector<std::int32_t>& labels,
                               Tensor2D* d_logits);

struct ParameterCountEntry {
  std::string name;
  std::size_t count = 0;
  bool trainable = true;
};

struct ParameterCounts {
  std::vector<ParameterCountEntry> entries;
  std::size_t trainable_total = 0;
  std::size_t total = 0;
};

ParameterCounts count_parameters(const ParameterStore& store);

/// The full entailment classifier.  One encoder serves both sentence slots
/// (the premise and hypothesis paths resolve to the same Parameter objects),
/// so an optimizer step moves both in lockstep.  The embedding table is a
/// frozen parameter: saved and restored with the model, skipped by the
/// optimizer.
class SiameseModel {
 public:
  SiameseModel(ModelConfig cfg, Vocab vocab);

  const ModelConfig& config() const { return cfg_; }
  const Vocab& vocab() const { return vocab_; }
  ParameterStore& params() { return store_; }
  const ParameterStore& params() const { return store_; }
  const Tensor2D& embeddings() const { return embedding_->value; }
  const EncoderParams& encoder() const { return encoder_; }

  struct ForwardCache {
    EncodeCache premise;
    EncodeCache hypothesis;
    Tensor2D match;  // 8d x B
    MatchHeadCache head;
  };

  /// Label logits, 3 x B.  With `training` set, dropout is sampled from
  /// `dropout_rng` (required only when the configured rate is nonzero).
  Tensor2D logits(const Batch& batch, bool training, Rng* dropout_rng,
                  ForwardCache& cache) const;

  /// Inference-mode class probabilities, one row per example (B x 3).
  Tensor2D probabilities(const Batch& batch) const;

  /// Inference-mode argmax labels, one per example.
  std::vector<std::int32_t> predict(const Batch& batch) const;

  /// Accumulates gradients for every trainable parameter given the loss
  /// gradient of the logits.
  void backward(const ForwardCache& cache, const Tensor2D& d_logits);

  /// Training-mode forward, cross-entropy against the batch labels, and
  /// full backward.  Gradients accumulate; the caller zeroes them between
  /// steps.  `correct` (optional) receives the number of argmax hits.
  real loss_and_backward(const Batch& batch, Rng* dropout_rng,
                         std::size_t* correct = nullptr);

  /// Detailed single-sentence encoding (used by the attention renderer).
  EncodedSentence encode_tokens(const std::vector<std::int32_t>& idx) const;

 private:
  ModelConfig cfg_;
  Vocab vocab_;
  ParameterStore store_;
  Parameter* embedding_ = nullptr;
  EncoderParams encoder_;
  MatchHeadParams head_;
};

}  // namespace entail
