#include "entail/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace entail {

double grad_check(const std::function<double()>& loss,
                  const std::function<void()>& refresh_grads,
                  const std::vector<GradTarget>& targets, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) {
    throw ArgumentError("grad_check: eps must lie in [1e-7, 1e-3]");
  }

  refresh_grads();

  // Copy analytic gradients before perturbing anything: refreshing is not
  // re-run per coordinate, and grad buffers may alias model state.
  std::vector<Tensor2D> analytic;
  analytic.reserve(targets.size());
  for (const auto& t : targets) {
    check_finite(*t.grad, "grad_check: analytic gradient of " + t.name);
    analytic.push_back(*t.grad);
  }

  double max_rel = 0;
  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    Tensor2D& value = *targets[ti].value;
    const Tensor2D& grad = analytic[ti];
    for (std::size_t i = 0; i < value.size(); ++i) {
      const real saved = value.raw()[i];

      value.raw()[i] = saved + real(eps);
      const double up = loss();
      value.raw()[i] = saved - real(eps);
      const double down = loss();
      value.raw()[i] = saved;

      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NumericError("grad_check: non-finite loss while perturbing " +
                           targets[ti].name + "[" + std::to_string(i) + "]");
      }

      const double numeric = (up - down) / (2.0 * eps);
      const double analytic_v = double(grad.raw()[i]);
      const double denom =
          std::max({1.0, std::abs(analytic_v), std::abs(numeric)});
      max_rel = std::max(max_rel, std::abs(analytic_v - numeric) / denom);
    }
  }
  return max_rel;
}

}  // namespace entail
