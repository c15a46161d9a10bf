#include "entail/model.hpp"

#include <algorithm>
#include <cmath>

#include "entail/error.hpp"

namespace entail {

void ModelConfig::validate() const {
  if (embed_dim == 0 || hidden_dim == 0)
    throw ArgumentError("model config: sizes must be at least 1");
  if (dropout < 0 || dropout >= 1)
    throw ArgumentError("model config: dropout must be in [0,1)");
}

real cross_entropy_from_logits(const Tensor2D& logits,
                               const std::vector<std::int32_t>& labels,
                               Tensor2D* d_logits) {
  const std::size_t classes = logits.rows();
  const std::size_t batch = logits.cols();
  if (labels.size() != batch)
    throw ArgumentError("cross_entropy: " + std::to_string(labels.size()) +
                        " labels for " + std::to_string(batch) + " columns");
  if (d_logits) *d_logits = Tensor2D(classes, batch);

  real total = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    const std::int32_t y = labels[b];
    if (y < 0 || std::size_t(y) >= classes)
      throw ArgumentError("cross_entropy: label " + std::to_string(y) +
                          " out of range at example " + std::to_string(b));
    real mx = logits(0, b);
    for (std::size_t c = 1; c < classes; ++c) mx = std::max(mx, logits(c, b));
    real z = 0;
    for (std::size_t c = 0; c < classes; ++c)
      z += std::exp(logits(c, b) - mx);
    const real lse = mx + std::log(z);
    total += lse - logits(std::size_t(y), b);
    if (d_logits) {
      for (std::size_t c = 0; c < classes; ++c) {
        const real p = std::exp(logits(c, b) - lse);
        (*d_logits)(c, b) = (p - (std::size_t(y) == c ? 1 : 0)) / real(batch);
      }
    }
  }
  return total / real(batch);
}

ParameterCounts count_parameters(const ParameterStore& store) {
  ParameterCounts out;
  for (std::size_t i = 0; i < store.count(); ++i) {
    const Parameter& p = store.at(i);
    out.entries.push_back({p.name, p.value.size(), p.trainable});
    out.total += p.value.size();
    if (p.trainable) out.trainable_total += p.value.size();
  }
  return out;
}

SiameseModel::SiameseModel(ModelConfig cfg, Vocab vocab)
    : cfg_(cfg), vocab_(std::move(vocab)) {
  cfg_.validate();
  if (vocab_.dim != cfg_.embed_dim)
    throw ArgumentError("model: vocabulary embeds at " +
                        std::to_string(vocab_.dim) + ", config wants " +
                        std::to_string(cfg_.embed_dim));

  embedding_ = &store_.add("embedding", vocab_.embeddings.rows(),
                           vocab_.embeddings.cols(), /*trainable=*/false);
  embedding_->value = std::move(vocab_.embeddings);
  vocab_.embeddings = Tensor2D();

  Rng init(cfg_.seed);
  encoder_ = make_encoder_params(store_, "encoder", cfg_.embed_dim,
                                 cfg_.hidden_dim, cfg_.attention, init);
  head_ = make_match_head(store_, "head", 8 * cfg_.hidden_dim,
                          cfg_.resolved_proj(), init);
}

Tensor2D SiameseModel::logits(const Batch& batch, bool training,
                              Rng* dropout_rng, ForwardCache& cache) const {
  encode_batch(encoder_, embedding_->value, batch.premise, batch.premise_len,
               cache.premise);
  encode_batch(encoder_, embedding_->value, batch.hypothesis,
               batch.hypothesis_len, cache.hypothesis);
  cache.match = match_vectors(cache.premise.rep(), cache.hypothesis.rep());
  match_head_forward(head_, cache.match, training, training ? cfg_.dropout : 0,
                     dropout_rng, cache.head);
  return cache.head.logits;
}

Tensor2D SiameseModel::probabilities(const Batch& batch) const {
  ForwardCache cache;
  const Tensor2D lg = logits(batch, false, nullptr, cache);
  Tensor2D out(batch.size(), 3);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    std::vector<real> col(3);
    for (std::size_t c = 0; c < 3; ++c) col[c] = lg(c, b);
    const auto p = softmax(col);
    for (std::size_t c = 0; c < 3; ++c) out(b, c) = p[c];
  }
  return out;
}

std::vector<std::int32_t> SiameseModel::predict(const Batch& batch) const {
  ForwardCache cache;
  const Tensor2D lg = logits(batch, false, nullptr, cache);
  std::vector<std::int32_t> out(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < 3; ++c)
      if (lg(c, b) > lg(best, b)) best = c;
    out[b] = std::int32_t(best);
  }
  return out;
}

void SiameseModel::backward(const ForwardCache& cache,
                            const Tensor2D& d_logits) {
  Tensor2D d_match(cache.match.rows(), cache.match.cols());
  match_head_backward(head_, cache.head, d_logits, d_match);

  const std::size_t rep_dim = 2 * cfg_.hidden_dim;
  Tensor2D d_rp(rep_dim, cache.match.cols());
  Tensor2D d_rh(rep_dim, cache.match.cols());
  match_vectors_backward(cache.premise.rep(), cache.hypothesis.rep(), d_match,
                         d_rp, d_rh);
  encode_batch_backward(encoder_, cache.premise, d_rp);
  encode_batch_backward(encoder_, cache.hypothesis, d_rh);
}

real SiameseModel::loss_and_backward(const Batch& batch, Rng* dropout_rng,
                                     std::size_t* correct) {
  ForwardCache cache;
  const Tensor2D lg = logits(batch, true, dropout_rng, cache);
  Tensor2D d_logits;
  const real loss = cross_entropy_from_logits(lg, batch.labels, &d_logits);
  backward(cache, d_logits);
  if (correct) {
    std::size_t hits = 0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < 3; ++c)
        if (lg(c, b) > lg(best, b)) best = c;
      if (std::int32_t(best) == batch.labels[b]) ++hits;
    }
    *correct = hits;
  }
  return loss;
}

EncodedSentence SiameseModel::encode_tokens(
    const std::vector<std::int32_t>& idx) const {
  return encode_sentence(encoder_, embedding_->value, idx);
}

}  // namespace entail
