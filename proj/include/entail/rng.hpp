#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "entail/tensor.hpp"

namespace entail {

/// Deterministic random source. The same seed yields the same sequence of
/// draws on every platform: the engine is mt19937_64 (whose output sequence
/// the standard pins down) and all value mappings are done from raw bits
/// here rather than through std distributions, which are not portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform draw in [0, 1) with 53-bit resolution.
  real unit() {
    return real((engine_() >> 11) * (1.0 / 9007199254740992.0));
  }

  /// Uniform draw in [lo, hi).
  real uniform(real lo, real hi) { return lo + unit() * (hi - lo); }

  /// Uniform draw strictly inside (lo, hi).
  real uniform_open(real lo, real hi) {
    for (;;) {
      const real u = unit();
      if (u > real(0)) {
        const real v = lo + u * (hi - lo);
        if (v > lo && v < hi) return v;
      }
    }
  }

  /// Unbiased draw in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw ArgumentError("Rng::below: n must be positive");
    const std::uint64_t limit = -n % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= limit) return x % n;
    }
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  void fill_uniform(Tensor2D& t, real lo, real hi) {
    for (real& x : t.raw()) x = uniform(lo, hi);
  }

  /// Serialized engine state, exact enough for bitwise restart.
  std::string state() const;
  void restore(const std::string& s);

 private:
  std::mt19937_64 engine_;
};

}  // namespace entail
