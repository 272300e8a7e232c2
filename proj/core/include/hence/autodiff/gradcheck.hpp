#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hence/autodiff/parameter.hpp"

namespace hence::ad {

struct GradCheckReport {
  double max_rel_error{0.0};
  std::string worst_parameter;
  std::size_t worst_index{0};
  double worst_analytic{0.0};
  double worst_numeric{0.0};
  std::size_t coordinates{0};
};

using ScalarFn = std::function<Tensor()>;

/// Analytic gradients of `f` (via backward) for each parameter, in order.
std::vector<std::vector<double>> analytic_gradients(const ScalarFn& f, std::span<Parameter> params);

/// Compares given analytic gradients against central differences
/// (f(p+h) - f(p-h)) / 2h. Relative error uses the denominator
/// max(|analytic|, |numeric|, 1e-8).
GradCheckReport compare_with_finite_differences(const ScalarFn& f, std::span<Parameter> params,
                                                const std::vector<std::vector<double>>& analytic,
                                                double h = 1e-5);

GradCheckReport finite_difference_check(const ScalarFn& f, std::span<Parameter> params,
                                        double h = 1e-5);

}  // namespace hence::ad
