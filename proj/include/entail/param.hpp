#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "entail/tensor.hpp"

namespace entail {

/// Named trainable tensor with a same-shape gradient accumulator.
/// During a backward pass, grad has a single-writer contract.
struct Parameter {
  std::string name;
  Tensor2D value;
  Tensor2D grad;
  bool trainable = true;

  Parameter(std::string n, std::size_t rows, std::size_t cols, bool train)
      : name(std::move(n)),
        value(rows, cols),
        grad(rows, cols),
        trainable(train) {}
};

/// Owns all parameters of a model. Registration order is fixed and defines
/// iteration order everywhere (optimizer, checkpoint, checksum), so a given
/// construction sequence is fully deterministic. Names are unique.
class ParameterStore {
 public:
  Parameter& add(const std::string& name, std::size_t rows, std::size_t cols,
                 bool trainable = true);

  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;

  std::size_t count() const { return params_.size(); }
  Parameter& at(std::size_t i) { return *params_[i]; }
  const Parameter& at(std::size_t i) const { return *params_[i]; }

  void zero_grads();

  /// Sum of value element counts over trainable parameters.
  std::size_t trainable_size() const;

  /// Order-sensitive FNV-1a hash over every value byte; detects any drift.
  std::uint64_t value_checksum() const;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace entail
