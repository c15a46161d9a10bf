#pragma once

#include <cstdint>
#include <vector>

namespace entail {

/// Three-way entailment label with a fixed index mapping.
enum class Label : std::int32_t {
  entailment = 0,
  contradiction = 1,
  neutral = 2,
};

inline constexpr std::int32_t label_count = 3;

/// Row-major matrix of token indices; one row per batch lane, padded with
/// the pad index beyond each lane's true length.
struct IndexMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int32_t> data;

  IndexMatrix() = default;
  IndexMatrix(std::size_t r, std::size_t c, std::int32_t fill = 0)
      : rows(r), cols(c), data(r * c, fill) {}

  std::int32_t& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  std::int32_t at(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
};

}  // namespace entail
