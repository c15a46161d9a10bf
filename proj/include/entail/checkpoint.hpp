#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "entail/data.hpp"
#include "entail/model.hpp"
#include "entail/rmsprop.hpp"

namespace entail {

inline constexpr std::uint32_t checkpoint_version = 1;

/// Everything beyond the tensors that a restart needs.
struct CheckpointMeta {
  ModelConfig config;
  InputStrategy strategy = InputStrategy::original;
  std::uint64_t epoch = 0;
  std::uint64_t step = 0;
};

/// Named RNG state strings (stream name, serialized engine state).
using RngStates = std::vector<std::pair<std::string, std::string>>;

/// Writes a self-describing binary container: magic, version, config block,
/// vocabulary, named tensor blocks with per-block checksums, optional
/// optimizer accumulators, RNG states, and a whole-file checksum.  Values
/// are stored as little-endian 64-bit reals regardless of build mode, so
/// save -> load -> save is byte-identical.
void save_checkpoint(const std::string& path, const SiameseModel& model,
                     const CheckpointMeta& meta,
                     const Rmsprop* optimizer = nullptr,
                     const RngStates& rng_states = {});

struct LoadedCheckpoint {
  CheckpointMeta meta;
  std::unique_ptr<SiameseModel> model;
  bool has_optimizer = false;
  std::unordered_map<std::string, Tensor2D> optimizer_state;
  RngStates rng_states;
};

/// Rebuilds the model exactly.  Truncated or corrupt files raise
/// IntegrityError before any model is produced; an unknown format version
/// raises VersionError.
LoadedCheckpoint load_checkpoint(const std::string& path);

/// IEEE CRC-32 (the zlib polynomial), used for the block checksums.
std::uint32_t crc32(const void* data, std::size_t len,
                    std::uint32_t seed = 0);

}  // namespace entail
