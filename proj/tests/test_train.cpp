#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "entail/checkpoint.hpp"
#include "entail/train.hpp"
#include "support/synth_nli.hpp"
#include "support/test_util.hpp"

using namespace entail;

namespace {

ModelConfig small_config(std::uint64_t seed) {
  ModelConfig cfg;
  cfg.embed_dim = 8;
  cfg.hidden_dim = 8;
  cfg.proj_dim = 8;
  cfg.attention = true;
  cfg.dropout = 0.25;
  cfg.seed = seed;
  return cfg;
}

SiameseModel small_model(const std::vector<NliExample>& train,
                         const std::vector<NliExample>& dev,
                         std::uint64_t seed) {
  auto tokens = collect_tokens(train);
  const auto extra = collect_tokens(dev);
  tokens.insert(tokens.end(), extra.begin(), extra.end());
  Rng rng(seed + 1);
  return SiameseModel(small_config(seed),
                      load_embeddings("", tokens, 8, rng));
}

}  // namespace

TEST_CASE("metric records serialize to one json object per line") {
  MetricRecord rec;
  rec.epoch = 4;
  rec.train_loss = 0.75;
  rec.train_acc = 0.5;
  rec.dev_acc = 0.25;
  rec.wall_time_s = 1.5;
  const auto j = nlohmann::json::parse(metric_to_json_line(rec));
  CHECK(j.at("epoch") == 4);
  CHECK(j.at("train_loss") == 0.75);
  CHECK(j.at("train_acc") == 0.5);
  CHECK(j.at("dev_acc") == 0.25);
  CHECK(j.at("wall_time_s") == 1.5);
  CHECK(j.size() == 5);
}

TEST_CASE("two runs from one seed produce the same numbers") {
  const auto train_data = synth::corpus(60, 1);
  const auto dev_data = synth::corpus(15, 2);

  TrainOptions opts;
  opts.epochs = 3;
  opts.batch_size = 16;

  SiameseModel m1 = small_model(train_data, dev_data, 5);
  SiameseModel m2 = small_model(train_data, dev_data, 5);
  const TrainResult r1 = train(m1, train_data, dev_data, opts);
  const TrainResult r2 = train(m2, train_data, dev_data, opts);

  REQUIRE(r1.log.size() == 3);
  REQUIRE(r2.log.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r1.log[i].epoch == i + 1);
    CHECK(r1.log[i].train_loss == r2.log[i].train_loss);
    CHECK(r1.log[i].train_acc == r2.log[i].train_acc);
    CHECK(r1.log[i].dev_acc == r2.log[i].dev_acc);
  }
  CHECK(r1.best_dev_acc == r2.best_dev_acc);
  CHECK(r1.best_epoch == r2.best_epoch);
  CHECK(r1.steps == r2.steps);
  CHECK(m1.params().value_checksum() == m2.params().value_checksum());

  // A different seed diverges.
  SiameseModel m3 = small_model(train_data, dev_data, 6);
  const TrainResult r3 = train(m3, train_data, dev_data, opts);
  CHECK(m3.params().value_checksum() != m1.params().value_checksum());
  (void)r3;
}

TEST_CASE("the metric log holds one parseable line per epoch") {
  const auto dir = test_util::fresh_dir("metrics");
  const auto train_data = synth::corpus(40, 3);
  const auto dev_data = synth::corpus(10, 4);

  TrainOptions opts;
  opts.epochs = 4;
  opts.batch_size = 16;
  opts.metrics_path = (dir / "metrics.jsonl").string();

  SiameseModel model = small_model(train_data, dev_data, 7);
  const TrainResult res = train(model, train_data, dev_data, opts);

  std::ifstream in(opts.metrics_path);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    ++lines;
    CHECK(j.at("epoch") == lines);
    CHECK(std::isfinite(j.at("train_loss").get<double>()));
    CHECK(j.at("dev_acc").get<double>() >= 0.0);
    CHECK(j.at("dev_acc").get<double>() <= 1.0);
    CHECK(j.at("wall_time_s").get<double>() >= 0.0);
  }
  CHECK(lines == opts.epochs);
  CHECK(res.log.size() == opts.epochs);
}

TEST_CASE("the best-dev checkpoint reloads to the logged accuracy") {
  const auto dir = test_util::fresh_dir("bestdev");
  const auto train_data = synth::corpus(60, 5);
  const auto dev_data = synth::corpus(15, 6);

  TrainOptions opts;
  opts.epochs = 3;
  opts.batch_size = 16;
  opts.strategy = InputStrategy::invert_premises;
  opts.checkpoint_path = (dir / "best.eck").string();

  SiameseModel model = small_model(train_data, dev_data, 11);
  const TrainResult res = train(model, train_data, dev_data, opts);

  REQUIRE(std::filesystem::exists(opts.checkpoint_path));
  LoadedCheckpoint loaded = load_checkpoint(opts.checkpoint_path);
  CHECK(loaded.meta.strategy == InputStrategy::invert_premises);
  CHECK(loaded.meta.epoch == res.best_epoch);
  CHECK(loaded.has_optimizer);
  REQUIRE(loaded.rng_states.size() == 2);
  CHECK(loaded.rng_states[0].first == "data");
  CHECK(loaded.rng_states[1].first == "dropout");

  const EvalResult dev = evaluate(*loaded.model, dev_data, opts.batch_size,
                                  InputStrategy::invert_premises);
  CHECK(dev.accuracy == res.best_dev_acc);
}

TEST_CASE("training loss falls on a learnable toy corpus") {
  const auto train_data = synth::corpus(120, 7);
  const auto dev_data = synth::corpus(30, 8);

  TrainOptions opts;
  opts.epochs = 8;
  opts.batch_size = 16;

  SiameseModel model = small_model(train_data, dev_data, 13);
  const TrainResult res = train(model, train_data, dev_data, opts);
  REQUIRE(res.log.size() == 8);
  CHECK(res.log.back().train_loss < res.log.front().train_loss);
}

TEST_CASE("a poisoned parameter aborts with diagnostics") {
  const auto train_data = synth::corpus(20, 9);
  const auto dev_data = synth::corpus(10, 10);

  SiameseModel model = small_model(train_data, dev_data, 17);
  model.params().find("head.out")->value(0, 0) =
      std::numeric_limits<real>::quiet_NaN();

  TrainOptions opts;
  opts.epochs = 1;
  opts.batch_size = 8;
  CHECK_THROWS_WITH_AS(train(model, train_data, dev_data, opts),
                       doctest::Contains("parameter norms"), TrainingAbort);
  try {
    SiameseModel again = small_model(train_data, dev_data, 17);
    again.params().find("head.out")->value(0, 0) =
        std::numeric_limits<real>::quiet_NaN();
    train(again, train_data, dev_data, opts);
    FAIL("expected TrainingAbort");
  } catch (const TrainingAbort& e) {
    const std::string msg = e.what();
    CHECK(msg.find("epoch 1") != std::string::npos);
    CHECK(msg.find("batch 0") != std::string::npos);
    CHECK(msg.find("head.out=") != std::string::npos);
  }
}

TEST_CASE("evaluate counts a one-class predictor correctly") {
  const auto data = synth::corpus(30, 11);  // labels cycle 0,1,2
  SiameseModel model = small_model(data, data, 19);
  model.params().find("head.out")->value.zero();
  Parameter* bias = model.params().find("head.out_b");
  bias->value.zero();
  bias->value(0, 0) = 1.0;  // every logit column now favors label 0

  const EvalResult res = evaluate(model, data, 8, InputStrategy::original);
  CHECK(res.total == 30);
  CHECK(res.accuracy == doctest::Approx(10.0 / 30).epsilon(1e-12));
  for (std::size_t gold = 0; gold < 3; ++gold) {
    CHECK(res.confusion[gold][0] == 10);
    CHECK(res.confusion[gold][1] == 0);
    CHECK(res.confusion[gold][2] == 0);
  }

  // Accuracy is recomputable from the confusion diagonal.
  std::size_t diag = 0, total = 0;
  for (std::size_t g = 0; g < 3; ++g)
    for (std::size_t p = 0; p < 3; ++p) {
      total += res.confusion[g][p];
      if (g == p) diag += res.confusion[g][p];
    }
  CHECK(total == res.total);
  CHECK(res.accuracy == doctest::Approx(real(diag) / real(total)));

  const EvalResult res2 = evaluate(model, data, 8, InputStrategy::original);
  CHECK(res2.accuracy == res.accuracy);
}

TEST_CASE("training argument validation") {
  const auto data = synth::corpus(10, 12);
  SiameseModel model = small_model(data, data, 23);
  TrainOptions opts;
  opts.epochs = 0;
  CHECK_THROWS_AS(train(model, data, data, opts), ArgumentError);
  opts.epochs = 1;
  CHECK_THROWS_AS(train(model, {}, data, opts), ArgumentError);
  CHECK_THROWS_AS(train(model, data, {}, opts), ArgumentError);
  CHECK_THROWS_AS(evaluate(model, {}, 8, InputStrategy::original),
                  ArgumentError);
}
