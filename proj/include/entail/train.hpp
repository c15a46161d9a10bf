#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "entail/data.hpp"
#include "entail/model.hpp"
#include "entail/rmsprop.hpp"

namespace entail {

struct TrainOptions {
  std::size_t epochs = 10;
  std::size_t batch_size = 128;
  real lr = 0.001;
  real clip_norm = 5.0;  // non-positive turns clipping off
  InputStrategy strategy = InputStrategy::original;
  bool save_optimizer = true;
  std::string checkpoint_path;  // best-dev snapshot; empty skips saving
  std::string metrics_path;     // line-delimited records; empty skips
  bool verbose = false;         // per-epoch progress on stdout
};

/// One line of the metric log.  Wall time is informational and is the one
/// field that varies between otherwise identical runs.
struct MetricRecord {
  std::size_t epoch = 0;  // 1-based
  real train_loss = 0;
  real train_acc = 0;
  real dev_acc = 0;
  double wall_time_s = 0;
};

std::string metric_to_json_line(const MetricRecord& m);

struct TrainResult {
  std::vector<MetricRecord> log;
  real best_dev_acc = 0;
  std::size_t best_epoch = 0;  // 1-based; 0 when no epoch ran
  std::uint64_t steps = 0;
};

struct EvalResult {
  real accuracy = 0;
  std::size_t total = 0;
  // confusion[gold][predicted]
  std::array<std::array<std::size_t, 3>, 3> confusion{};
};

/// Inference-mode accuracy and confusion counts.  The input strategy must
/// match training, since it changes what the model sees.
EvalResult evaluate(const SiameseModel& model,
                    const std::vector<NliExample>& data,
                    std::size_t batch_size, InputStrategy strategy);

/// Epoch loop: shuffle, batch, forward with dropout, cross-entropy,
/// backward, clip, optimizer step; dev evaluation after every epoch with
/// best-dev checkpointing.  All randomness derives from the model seed, so
/// a fixed (seed, config, data) triple reproduces every number exactly.
/// Throws TrainingAbort when a loss turns non-finite, naming the batch and
/// the parameter norms at that point.
TrainResult train(SiameseModel& model, const std::vector<NliExample>& train_data,
                  const std::vector<NliExample>& dev_data,
                  const TrainOptions& opts);

}  // namespace entail
