#include "entail/rmsprop.hpp"

#include <cmath>

namespace entail {

void Rmsprop::step(ParameterStore& store) {
  for (std::size_t i = 0; i < store.count(); ++i) {
    Parameter& p = store.at(i);
    if (!p.trainable) continue;
    auto it = state_.find(p.name);
    if (it == state_.end())
      it = state_.emplace(p.name, Tensor2D(p.value.rows(), p.value.cols()))
               .first;
    Tensor2D& acc = it->second;

    real* e = acc.data();
    real* v = p.value.data();
    const real* g = p.grad.data();
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      e[k] = cfg_.decay * e[k] + (1 - cfg_.decay) * g[k] * g[k];
      v[k] -= cfg_.lr * g[k] / std::sqrt(e[k] + cfg_.eps);
    }
  }
}

real clip_global_norm(ParameterStore& store, real max_norm) {
  real sq = 0;
  for (std::size_t i = 0; i < store.count(); ++i) {
    const Parameter& p = store.at(i);
    if (p.trainable) sq += squared_norm(p.grad);
  }
  const real norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const real s = max_norm / norm;
    for (std::size_t i = 0; i < store.count(); ++i) {
      Parameter& p = store.at(i);
      if (p.trainable) scale_inplace(p.grad, s);
    }
  }
  return norm;
}

}  // namespace entail
