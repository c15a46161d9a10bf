#pragma once

#include <string>
#include <unordered_map>

#include "entail/param.hpp"
#include "entail/tensor.hpp"

namespace entail {

struct RmspropConfig {
  real decay = 0.9;
  real lr = 0.001;
  real eps = 1e-8;
};

/// Root-mean-square propagation: each trainable parameter keeps a decayed
/// accumulator of squared gradients and is stepped by the gradient scaled
/// with the inverse root of that accumulator.  Frozen parameters are never
/// touched and get no accumulator.
class Rmsprop {
 public:
  explicit Rmsprop(RmspropConfig cfg = {}) : cfg_(cfg) {}

  const RmspropConfig& config() const { return cfg_; }

  /// E <- decay*E + (1-decay)*g^2;  theta <- theta - lr * g / sqrt(E + eps).
  void step(ParameterStore& store);

  /// Accumulators keyed by parameter name (empty until the first step).
  const std::unordered_map<std::string, Tensor2D>& state() const {
    return state_;
  }
  void restore_state(std::unordered_map<std::string, Tensor2D> s) {
    state_ = std::move(s);
  }

 private:
  RmspropConfig cfg_;
  std::unordered_map<std::string, Tensor2D> state_;
};

/// Scales every trainable gradient so their joint Euclidean norm does not
/// exceed `max_norm`; returns the norm before clipping.  A non-positive
/// `max_norm` disables clipping.
real clip_global_norm(ParameterStore& store, real max_norm);

}  // namespace entail
