#include "entail/param.hpp"

#include <cstring>

namespace entail {

Parameter& ParameterStore::add(const std::string& name, std::size_t rows,
                               std::size_t cols, bool trainable) {
  if (index_.count(name)) {
    throw ArgumentError("ParameterStore: duplicate parameter name '" + name +
                        "'");
  }
  params_.push_back(std::make_unique<Parameter>(name, rows, cols, trainable));
  index_[name] = params_.size() - 1;
  return *params_.back();
}

Parameter* ParameterStore::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : params_[it->second].get();
}

const Parameter* ParameterStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : params_[it->second].get();
}

void ParameterStore::zero_grads() {
  for (auto& p : params_) p->grad.zero();
}

std::size_t ParameterStore::trainable_size() const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    if (p->trainable) n += p->value.size();
  }
  return n;
}

std::uint64_t ParameterStore::value_checksum() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* bytes, std::size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& p : params_) {
    mix(p->name.data(), p->name.size());
    mix(p->value.data(), p->value.size() * sizeof(real));
  }
  return h;
}

}  // namespace entail
