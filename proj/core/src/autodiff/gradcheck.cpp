#include "hence/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "hence/error.hpp"

namespace hence::ad {

std::vector<std::vector<double>> analytic_gradients(const ScalarFn& f, std::span<Parameter> params) {
  for (auto& p : params) p.tensor.zero_grad();
  backward(f());
  std::vector<std::vector<double>> grads;
  grads.reserve(params.size());
  for (const auto& p : params) grads.emplace_back(p.tensor.grad().begin(), p.tensor.grad().end());
  return grads;
}

GradCheckReport compare_with_finite_differences(const ScalarFn& f, std::span<Parameter> params,
                                                const std::vector<std::vector<double>>& analytic,
                                                double h) {
  if (analytic.size() != params.size()) {
    throw DimensionError("finite difference check: gradient count does not match parameters");
  }
  GradCheckReport report;
  NoGradGuard no_grad;
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto values = params[p].tensor.mutable_values();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double original = values[k];
      values[k] = original + h;
      const double plus = f().item();
      values[k] = original - h;
      const double minus = f().item();
      values[k] = original;

      const double numeric = (plus - minus) / (2.0 * h);
      const double a = analytic[p][k];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++report.coordinates;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_parameter = params[p].name;
        report.worst_index = k;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

GradCheckReport finite_difference_check(const ScalarFn& f, std::span<Parameter> params, double h) {
  const auto analytic = analytic_gradients(f, params);
  return compare_with_finite_differences(f, params, analytic, h);
}

}  // namespace hence::ad
