#pragma once

#include <functional>
#include <string>
#include <vector>

#include "entail/tensor.hpp"

namespace entail {

/// One tensor whose analytic gradient is to be verified. `value` is perturbed
/// in place by the checker; `grad` must point at the analytic gradient filled
/// by `refresh_grads` below.
struct GradTarget {
  std::string name;
  Tensor2D* value = nullptr;
  const Tensor2D* grad = nullptr;
};

/// Centered-finite-difference gradient check.
///
/// `refresh_grads` runs one forward+backward and must leave the analytic
/// gradients in the targets' grad tensors. `loss` recomputes the scalar loss
/// from the targets' current values. For each coordinate of each target the
/// checker compares the analytic entry against (loss(+eps) - loss(-eps)) /
/// (2 eps) and returns the max of
///   |analytic - numeric| / max(1, |analytic|, |numeric|).
///
/// eps must lie in [1e-7, 1e-3]. A non-finite loss or gradient raises
/// NumericError naming the offending coordinate.
double grad_check(const std::function<double()>& loss,
                  const std::function<void()>& refresh_grads,
                  const std::vector<GradTarget>& targets, double eps);

}  // namespace entail
