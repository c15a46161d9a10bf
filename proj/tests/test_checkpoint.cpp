#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "entail/checkpoint.hpp"
#include "entail/model.hpp"
#include "entail/rmsprop.hpp"
#include "entail/rng.hpp"
#include "support/test_util.hpp"

using namespace entail;

namespace {

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), std::streamsize(bytes.size()));
}

CheckpointMeta toy_meta(const SiameseModel& model) {
  CheckpointMeta meta;
  meta.config = model.config();
  meta.strategy = InputStrategy::differentiate;
  meta.epoch = 3;
  meta.step = 99;
  return meta;
}

}  // namespace

TEST_CASE("crc32 matches the zlib check value") {
  // The classic test vector for the polynomial.
  CHECK(crc32("123456789", 9) == 0xCBF43926u);
  CHECK(crc32("", 0) == 0u);
}

TEST_CASE("save, load, save is byte-identical and value-exact") {
  const auto dir = test_util::fresh_dir("ured");
  SiameseModel model = test_util::tiny_model();
  const CheckpointMeta meta = toy_meta(model);

  const auto first = dir / "model.eck";
  save_checkpoint(first.string(), model, meta);

  LoadedCheckpoint loaded = load_checkpoint(first.string());
  REQUIRE(loaded.model != nullptr);

  CHECK(loaded.meta.strategy == InputStrategy::differentiate);
  CHECK(loaded.meta.epoch == 3);
  CHECK(loaded.meta.step == 99);
  CHECK(loaded.meta.config.embed_dim == model.config().embed_dim);
  CHECK(loaded.meta.config.hidden_dim == model.config().hidden_dim);
  CHECK(loaded.meta.config.proj_dim == model.config().proj_dim);
  CHECK(loaded.meta.config.attention == model.config().attention);
  CHECK(loaded.meta.config.seed == model.config().seed);
  CHECK(loaded.model->vocab().tokens == model.vocab().tokens);

  const ParameterStore& a = model.params();
  const ParameterStore& b = loaded.model->params();
  REQUIRE(a.count() == b.count());
  for (std::size_t i = 0; i < a.count(); ++i) {
    CHECK(a.at(i).name == b.at(i).name);
    CHECK(a.at(i).trainable == b.at(i).trainable);
    CHECK(max_abs_diff(a.at(i).value, b.at(i).value) == 0);
  }
  CHECK(a.value_checksum() == b.value_checksum());

  const auto second = dir / "model2.eck";
  save_checkpoint(second.string(), *loaded.model, loaded.meta);
  CHECK(test_util::slurp(first) == test_util::slurp(second));
}

TEST_CASE("a reloaded model predicts identically") {
  const auto dir = test_util::fresh_dir("upred");
  SiameseModel model = test_util::tiny_model();
  const auto path = dir / "model.eck";
  save_checkpoint(path.string(), model, toy_meta(model));
  LoadedCheckpoint loaded = load_checkpoint(path.string());

  const Batch batch = test_util::index_batch(
      {{2, 3, 4}, {5, 6, 7}}, {{3, 4}, {2, 5}}, {0, 1});
  const Tensor2D pa = model.probabilities(batch);
  const Tensor2D pb = loaded.model->probabilities(batch);
  CHECK(max_abs_diff(pa, pb) == 0);
}

TEST_CASE("optimizer accumulators and rng streams round-trip") {
  const auto dir = test_util::fresh_dir("uopt");
  SiameseModel model = test_util::tiny_model();

  Rmsprop opt;
  const Batch batch = test_util::index_batch({{2, 3}}, {{4, 5}}, {1});
  Rng dropout(123);
  for (int i = 0; i < 2; ++i) {
    model.params().zero_grads();
    model.loss_and_backward(batch, &dropout);
    opt.step(model.params());
  }

  Rng data(456);
  data.next_u64();
  const RngStates states = {{"data", data.state()},
                            {"dropout", dropout.state()}};

  const auto path = dir / "model.eck";
  save_checkpoint(path.string(), model, toy_meta(model), &opt, states);
  LoadedCheckpoint loaded = load_checkpoint(path.string());

  REQUIRE(loaded.has_optimizer);
  REQUIRE(loaded.optimizer_state.size() == opt.state().size());
  for (const auto& [name, acc] : opt.state()) {
    REQUIRE(loaded.optimizer_state.count(name) == 1);
    CHECK(max_abs_diff(loaded.optimizer_state.at(name), acc) == 0);
  }

  REQUIRE(loaded.rng_states.size() == 2);
  CHECK(loaded.rng_states[0].first == "data");
  CHECK(loaded.rng_states[0].second == data.state());
  Rng revived(0);
  revived.restore(loaded.rng_states[1].second);
  Rng fresh(123);
  fresh.restore(dropout.state());
  CHECK(revived.next_u64() == fresh.next_u64());

  // Stepping the restored optimizer matches stepping the original.
  Rmsprop opt2;
  opt2.restore_state(loaded.optimizer_state);
  loaded.model->params().zero_grads();
  model.params().zero_grads();
  Rng da(9), db(9);
  loaded.model->loss_and_backward(batch, &da);
  model.loss_and_backward(batch, &db);
  opt2.step(loaded.model->params());
  opt.step(model.params());
  CHECK(loaded.model->params().value_checksum() ==
        model.params().value_checksum());
}

TEST_CASE("a checkpoint without an optimizer says so") {
  const auto dir = test_util::fresh_dir("uplain");
  SiameseModel model = test_util::tiny_model();
  const auto path = dir / "model.eck";
  save_checkpoint(path.string(), model, toy_meta(model));
  LoadedCheckpoint loaded = load_checkpoint(path.string());
  CHECK_FALSE(loaded.has_optimizer);
  CHECK(loaded.optimizer_state.empty());
  CHECK(loaded.rng_states.empty());
}

TEST_CASE("truncation is caught before any model is built") {
  const auto dir = test_util::fresh_dir("utrunc");
  SiameseModel model = test_util::tiny_model();
  const auto path = dir / "model.eck";
  save_checkpoint(path.string(), model, toy_meta(model));
  const std::string bytes = test_util::slurp(path);

  for (const std::size_t keep :
       {bytes.size() - 1, bytes.size() / 2, std::size_t(10), std::size_t(0)}) {
    const auto cut = dir / ("cut" + std::to_string(keep) + ".eck");
    write_bytes(cut, bytes.substr(0, keep));
    CHECK_THROWS_AS(load_checkpoint(cut.string()), IntegrityError);
  }
}

TEST_CASE("a flipped byte anywhere is caught") {
  const auto dir = test_util::fresh_dir("uflip");
  SiameseModel model = test_util::tiny_model();
  const auto path = dir / "model.eck";
  save_checkpoint(path.string(), model, toy_meta(model));
  const std::string bytes = test_util::slurp(path);

  for (const std::size_t pos :
       {std::size_t(0), bytes.size() / 3, 2 * bytes.size() / 3,
        bytes.size() - 1}) {
    std::string bad = bytes;
    bad[pos] = char(bad[pos] ^ 0x41);
    const auto flip = dir / ("flip" + std::to_string(pos) + ".eck");
    write_bytes(flip, bad);
    CHECK_THROWS_AS(load_checkpoint(flip.string()), IntegrityError);
  }
}

TEST_CASE("an unknown version is reported as such") {
  const auto dir = test_util::fresh_dir("uver");
  SiameseModel model = test_util::tiny_model();
  const auto path = dir / "model.eck";
  save_checkpoint(path.string(), model, toy_meta(model));
  std::string bytes = test_util::slurp(path);

  // The version word sits after the 8-byte magic; bump it and refresh the
  // trailing whole-file checksum so only the version looks wrong.
  bytes[8] = char(99);
  const std::string body = bytes.substr(0, bytes.size() - 4);
  const std::uint32_t fixed = crc32(body.data(), body.size());
  for (int i = 0; i < 4; ++i)
    bytes[bytes.size() - 4 + std::size_t(i)] =
        char((fixed >> (8 * i)) & 0xFF);

  const auto bumped = dir / "bumped.eck";
  write_bytes(bumped, bytes);
  CHECK_THROWS_AS(load_checkpoint(bumped.string()), VersionError);
}

TEST_CASE("a foreign file is rejected") {
  const auto dir = test_util::fresh_dir("umagic");
  const auto path = dir / "not-a-checkpoint.eck";
  test_util::spit(path, "this is definitely not a model checkpoint file");
  CHECK_THROWS_AS(load_checkpoint(path.string()), IntegrityError);
  CHECK_THROWS_AS(load_checkpoint((dir / "absent.eck").string()), IoError);
}
