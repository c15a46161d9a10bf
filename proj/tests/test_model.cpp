#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "entail/grad_check.hpp"
#include "entail/model.hpp"
#include "entail/rng.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

using namespace entail;

namespace {

Batch toy_batch() {
  return test_util::index_batch({{2, 3, 4}, {5, 6, 2}},
                                {{3, 4}, {2, 5, 6, 7}}, {0, 2});
}

}  // namespace

TEST_CASE("config validation") {
  ModelConfig cfg;
  cfg.embed_dim = 0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg = ModelConfig{};
  cfg.dropout = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg = ModelConfig{};
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.resolved_proj() == cfg.hidden_dim);
  cfg.proj_dim = 17;
  CHECK(cfg.resolved_proj() == 17);
}

TEST_CASE("cross entropy matches the scalar oracle") {
  Rng rng(5);
  for (int round = 0; round < 20; ++round) {
    const std::size_t B = 1 + rng.below(5);
    Tensor2D logits = test_util::random_tensor(3, B, rng, -4, 4);
    std::vector<std::int32_t> labels(B);
    for (auto& l : labels) l = std::int32_t(rng.below(3));
    const real got = cross_entropy_from_logits(logits, labels, nullptr);
    const real want = oracle::cross_entropy_ref(logits, labels);
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("cross entropy handles extreme logits and perfect predictions") {
  Tensor2D logits(3, 1);
  logits(0, 0) = 1000;
  logits(1, 0) = -1000;
  logits(2, 0) = 0;
  const real big = cross_entropy_from_logits(logits, {2}, nullptr);
  CHECK(std::isfinite(big));
  CHECK(big == doctest::Approx(1000.0).epsilon(1e-9));

  logits(0, 0) = 50;
  logits(1, 0) = 0;
  logits(2, 0) = 0;
  CHECK(cross_entropy_from_logits(logits, {0}, nullptr) <= 1e-9);

  CHECK_THROWS_AS(cross_entropy_from_logits(logits, {3}, nullptr),
                  ArgumentError);
  CHECK_THROWS_AS(cross_entropy_from_logits(logits, {0, 1}, nullptr),
                  ArgumentError);
}

TEST_CASE("cross entropy gradient is softmax minus onehot over batch") {
  Rng rng(7);
  Tensor2D logits = test_util::random_tensor(3, 4, rng, -2, 2);
  std::vector<std::int32_t> labels = {0, 1, 2, 1};
  Tensor2D d;
  cross_entropy_from_logits(logits, labels, &d);
  for (std::size_t b = 0; b < 4; ++b) {
    std::vector<real> col(3);
    for (std::size_t c = 0; c < 3; ++c) col[c] = logits(c, b);
    const auto p = oracle::softmax_ref(col);
    real colsum = 0;
    for (std::size_t c = 0; c < 3; ++c) {
      const real onehot = std::size_t(labels[b]) == c ? 1.0 : 0.0;
      CHECK(d(c, b) == doctest::Approx((p[c] - onehot) / 4).epsilon(1e-10));
      colsum += d(c, b);
    }
    CHECK(std::abs(colsum) <= 1e-12);
  }
}

TEST_CASE("a zeroed classifier output layer predicts uniformly") {
  SiameseModel model = test_util::tiny_model();
  model.params().find("head.out")->value.zero();
  model.params().find("head.out_b")->value.zero();

  const Batch batch = toy_batch();
  const Tensor2D probs = model.probabilities(batch);
  for (std::size_t b = 0; b < batch.size(); ++b)
    for (std::size_t c = 0; c < 3; ++c)
      CHECK(std::abs(probs(b, c) - 1.0 / 3) <= 1e-12);

  SiameseModel::ForwardCache cache;
  const Tensor2D lg = model.logits(batch, false, nullptr, cache);
  const real loss = cross_entropy_from_logits(lg, batch.labels, nullptr);
  CHECK(std::abs(loss - std::log(3.0)) <= 1e-9);
}

TEST_CASE("batched forward equals example-at-a-time forward") {
  SiameseModel model = test_util::tiny_model();
  const Batch batch = toy_batch();
  const Tensor2D probs = model.probabilities(batch);

  for (std::size_t b = 0; b < batch.size(); ++b) {
    std::vector<std::int32_t> prem, hyp;
    for (std::size_t t = 0; t < std::size_t(batch.premise_len[b]); ++t)
      prem.push_back(batch.premise.at(b, t));
    for (std::size_t t = 0; t < std::size_t(batch.hypothesis_len[b]); ++t)
      hyp.push_back(batch.hypothesis.at(b, t));
    const Batch one = test_util::index_batch({prem}, {hyp},
                                             {batch.labels[b]});
    const Tensor2D single = model.probabilities(one);
    for (std::size_t c = 0; c < 3; ++c)
      CHECK(probs(b, c) == doctest::Approx(single(0, c)).epsilon(1e-10));
  }
}

TEST_CASE("duplicated examples produce identical columns") {
  SiameseModel model = test_util::tiny_model();
  const Batch batch = test_util::index_batch(
      {{2, 3, 4}, {2, 3, 4}}, {{5, 6}, {5, 6}}, {0, 0});
  const Tensor2D probs = model.probabilities(batch);
  for (std::size_t c = 0; c < 3; ++c)
    CHECK(probs(0, c) == doctest::Approx(probs(1, c)).epsilon(1e-14));
}

TEST_CASE("one parameter store serves both sentence slots") {
  SiameseModel model = test_util::tiny_model();
  // Every parameter lives under the embedding, encoder or head prefix —
  // there is no premise/hypothesis copy of anything.
  const ParameterStore& store = model.params();
  std::size_t encoder_params = 0;
  for (std::size_t i = 0; i < store.count(); ++i) {
    const std::string& n = store.at(i).name;
    const bool known = n == "embedding" || n.rfind("encoder.", 0) == 0 ||
                       n.rfind("head.", 0) == 0;
    CHECK(known);
    if (n.rfind("encoder.", 0) == 0) ++encoder_params;
  }
  // Two LSTM directions (12 tensors each) plus three attention tensors.
  CHECK(encoder_params == 27);

  // Identical sentences in the two slots encode identically.
  const Batch batch = test_util::index_batch({{2, 3, 4}}, {{2, 3, 4}}, {0});
  SiameseModel::ForwardCache cache;
  model.logits(batch, false, nullptr, cache);
  CHECK(max_abs_diff(cache.premise.rep(), cache.hypothesis.rep()) == 0);
}

TEST_CASE("embedding table is frozen") {
  SiameseModel model = test_util::tiny_model();
  const Parameter* emb = model.params().find("embedding");
  REQUIRE(emb != nullptr);
  CHECK_FALSE(emb->trainable);
  CHECK(emb->value.rows() == model.vocab().size());
}

TEST_CASE("parameter counts: attention cost and the documented sizes") {
  auto count_for = [](std::size_t e, std::size_t d, std::size_t m,
                      bool attention) {
    ModelConfig cfg;
    cfg.embed_dim = e;
    cfg.hidden_dim = d;
    cfg.proj_dim = m;
    cfg.attention = attention;
    cfg.dropout = 0;
    cfg.seed = 1;
    SiameseModel model(cfg,
                       test_util::random_vocab({"a", "b", "c"}, e, 2));
    return count_parameters(model.params()).trainable_total;
  };

  // Hand count at e=4, d=3, m=5: two cells of 4*(4*3+3*3+3), attention over
  // width 6 (36+36+6), head 5*24+5+3*5+3.
  CHECK(count_for(4, 3, 5, true) == 413);

  // Enabling attention costs exactly the two square maps plus the scorer.
  for (std::size_t d : {2, 3, 5, 8}) {
    const std::size_t with = count_for(3, d, 4, true);
    const std::size_t without = count_for(3, d, 4, false);
    CHECK(with - without == 2 * (2 * d) * (2 * d) + 2 * d);
  }

  // The documented full-scale configuration lands near 2.8M trainable.
  const std::size_t full = count_for(300, 300, 300, true);
  CHECK(full == 2884203);
  CHECK(std::abs(double(full) - 2.8e6) / 2.8e6 <= 0.05);
}

TEST_CASE("whole-model gradients pass centered differences") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    SiameseModel model = test_util::tiny_model(4, 3, 5, true, 80 + seed, 0.0);
    ParameterStore& store = model.params();
    const Batch batch = toy_batch();

    auto loss = [&] {
      SiameseModel::ForwardCache cache;
      const Tensor2D lg = model.logits(batch, true, nullptr, cache);
      return double(cross_entropy_from_logits(lg, batch.labels, nullptr));
    };
    auto refresh = [&] {
      store.zero_grads();
      model.loss_and_backward(batch, nullptr);
    };

    std::vector<GradTarget> targets;
    for (std::size_t i = 0; i < store.count(); ++i) {
      Parameter& prm = store.at(i);
      if (!prm.trainable) continue;
      targets.push_back({prm.name, &prm.value, &prm.grad});
    }
    CHECK(grad_check(loss, refresh, targets, 1e-5) < 1e-4);
  }
}

TEST_CASE("loss_and_backward reports argmax hits") {
  SiameseModel model = test_util::tiny_model(4, 3, 5, true, 7, 0.0);
  const Batch batch = toy_batch();
  const auto preds = model.predict(batch);
  std::size_t expect = 0;
  for (std::size_t b = 0; b < batch.size(); ++b)
    if (preds[b] == batch.labels[b]) ++expect;

  std::size_t correct = 0;
  model.params().zero_grads();
  model.loss_and_backward(batch, nullptr, &correct);
  CHECK(correct == expect);
}

TEST_CASE("vocabulary mismatch with the config is rejected") {
  ModelConfig cfg;
  cfg.embed_dim = 4;
  cfg.hidden_dim = 3;
  CHECK_THROWS_AS(
      SiameseModel(cfg, test_util::random_vocab({"a"}, 5, 1)),
      ArgumentError);
}
