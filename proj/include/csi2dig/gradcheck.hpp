#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "csi2dig/errors.hpp"
#include "csi2dig/tensor.hpp"

namespace csi2dig {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  size_t worst_index = 0;
  size_t params_checked = 0;

  bool passes(double tolerance) const { return max_rel_error < tolerance; }
};

// Central finite differences vs analytic gradients for every parameter.
// `loss_and_grad` must zero and fill the ParamSet gradients and return the
// loss; `loss_only` must be a pure function of the parameters (dropout
// disabled, fixed batchnorm batch). Relative error per entry is
// |a - n| / max(|a| + |n|, denom_floor).
template <typename T>
GradCheckReport grad_check(ParamSet<T>& params,
                           const std::function<double(ParamSet<T>&)>& loss_and_grad,
                           const std::function<double(ParamSet<T>&)>& loss_only,
                           double eps = 1e-4, double denom_floor = 1e-8) {
  double l1 = loss_only(params);
  double l2 = loss_only(params);
  if (l1 != l2)
    fail(Errc::non_deterministic_model, "two identical forward passes disagree");

  loss_and_grad(params);

  GradCheckReport report;
  for (auto& [name, slot] : params.slots) {
    for (size_t i = 0; i < slot.value.size(); ++i) {
      T saved = slot.value.data[i];
      T analytic = slot.grad.data[i];

      slot.value.data[i] = saved + T(eps);
      double lp = loss_only(params);
      slot.value.data[i] = saved - T(eps);
      double lm = loss_only(params);
      slot.value.data[i] = saved;

      double numeric = (lp - lm) / (2.0 * eps);
      double a = static_cast<double>(analytic);
      double rel = std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), denom_floor);
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = name;
        report.worst_index = i;
      }
      ++report.params_checked;
    }
  }
  return report;
}

}  // namespace csi2dig
