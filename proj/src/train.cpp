#include "entail/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "entail/checkpoint.hpp"
#include "entail/error.hpp"

namespace entail {

std::string metric_to_json_line(const MetricRecord& m) {
  nlohmann::json j;
  j["epoch"] = m.epoch;
  j["train_loss"] = m.train_loss;
  j["train_acc"] = m.train_acc;
  j["dev_acc"] = m.dev_acc;
  j["wall_time_s"] = m.wall_time_s;
  return j.dump();
}

EvalResult evaluate(const SiameseModel& model,
                    const std::vector<NliExample>& data,
                    std::size_t batch_size, InputStrategy strategy) {
  if (data.empty()) throw ArgumentError("evaluate: no examples");
  EvalResult res;
  const auto batches =
      make_batches(data, model.vocab(), batch_size, nullptr, strategy);
  std::size_t correct = 0;
  for (const auto& b : batches) {
    const auto pred = model.predict(b);
    for (std::size_t i = 0; i < b.size(); ++i) {
      const auto gold = std::size_t(b.labels[i]);
      ++res.confusion[gold][std::size_t(pred[i])];
      if (pred[i] == b.labels[i]) ++correct;
    }
    res.total += b.size();
  }
  res.accuracy = real(correct) / real(res.total);
  return res;
}

namespace {

std::string norm_report(const ParameterStore& store) {
  std::ostringstream out;
  for (std::size_t i = 0; i < store.count(); ++i) {
    const Parameter& p = store.at(i);
    if (i) out << ", ";
    out << p.name << "=" << std::sqrt(squared_norm(p.value));
  }
  return out.str();
}

}  // namespace

TrainResult train(SiameseModel& model,
                  const std::vector<NliExample>& train_data,
                  const std::vector<NliExample>& dev_data,
                  const TrainOptions& opts) {
  if (train_data.empty()) throw ArgumentError("train: no training examples");
  if (dev_data.empty()) throw ArgumentError("train: no dev examples");
  if (opts.epochs == 0) throw ArgumentError("train: epochs must be positive");

  // Independent deterministic streams, both derived from the config seed.
  const std::uint64_t seed = model.config().seed;
  Rng data_rng(seed ^ 0x9E3779B97F4A7C15ull);
  Rng dropout_rng(seed ^ 0xD1B54A32D192ED03ull);

  RmspropConfig opt_cfg;
  opt_cfg.lr = opts.lr;
  Rmsprop optimizer(opt_cfg);

  std::ofstream metrics;
  if (!opts.metrics_path.empty()) {
    metrics.open(opts.metrics_path, std::ios::trunc);
    if (!metrics)
      throw IoError("cannot write metric log " + opts.metrics_path);
  }

  TrainResult res;
  res.best_dev_acc = -1;
  std::uint64_t step = 0;

  for (std::size_t epoch = 1; epoch <= opts.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto batches = make_batches(train_data, model.vocab(),
                                      opts.batch_size, &data_rng,
                                      opts.strategy);
    real loss_sum = 0;
    std::size_t correct = 0, seen = 0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const Batch& b = batches[bi];
      model.params().zero_grads();
      std::size_t hits = 0;
      const real loss = model.loss_and_backward(b, &dropout_rng, &hits);
      if (!std::isfinite(loss))
        throw TrainingAbort("non-finite loss at epoch " +
                            std::to_string(epoch) + ", batch " +
                            std::to_string(bi) + "; parameter norms: " +
                            norm_report(model.params()));
      clip_global_norm(model.params(), opts.clip_norm);
      optimizer.step(model.params());
      ++step;
      loss_sum += loss * real(b.size());
      correct += hits;
      seen += b.size();
    }

    const EvalResult dev =
        evaluate(model, dev_data, opts.batch_size, opts.strategy);

    MetricRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / real(seen);
    rec.train_acc = real(correct) / real(seen);
    rec.dev_acc = dev.accuracy;
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    res.log.push_back(rec);
    if (metrics.is_open()) {
      metrics << metric_to_json_line(rec) << "\n";
      metrics.flush();
    }
    if (opts.verbose) {
      std::printf(
          "epoch %zu  train_loss %.4f  train_acc %.4f  dev_acc %.4f  "
          "(%.1fs)\n",
          epoch, double(rec.train_loss), double(rec.train_acc),
          double(rec.dev_acc), rec.wall_time_s);
      std::fflush(stdout);
    }

    if (dev.accuracy > res.best_dev_acc) {
      res.best_dev_acc = dev.accuracy;
      res.best_epoch = epoch;
      if (!opts.checkpoint_path.empty()) {
        CheckpointMeta meta;
        meta.config = model.config();
        meta.strategy = opts.strategy;
        meta.epoch = epoch;
        meta.step = step;
        RngStates states{{"data", data_rng.state()},
                         {"dropout", dropout_rng.state()}};
        save_checkpoint(opts.checkpoint_path, model, meta,
                        opts.save_optimizer ? &optimizer : nullptr, states);
      }
    }
  }
  res.steps = step;
  return res;
}

}  // namespace entail
