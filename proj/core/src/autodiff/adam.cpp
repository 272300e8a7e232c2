#include "hence/autodiff/adam.hpp"

#include <cmath>
#include <stdexcept>

#include "hence/error.hpp"

namespace hence::ad {

AdamState make_adam_state(const ParameterSet& params, AdamHyper hyper) {
  AdamState state;
  state.hyper = hyper;
  for (const auto& p : params.all()) {
    state.m.emplace_back(p.tensor.size(), 0.0);
    state.v.emplace_back(p.tensor.size(), 0.0);
  }
  return state;
}

void adam_step(ParameterSet& params, AdamState& state) {
  auto all = params.all();
  if (state.m.size() != all.size() || state.v.size() != all.size()) {
    throw DimensionError("adam_step: optimizer state has " + std::to_string(state.m.size()) +
                         " slots for " + std::to_string(all.size()) + " parameters");
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!all[i].tensor.has_grad()) {
      throw std::invalid_argument("adam_step: parameter '" + all[i].name + "' has no gradient");
    }
    if (state.m[i].size() != all[i].tensor.size()) {
      throw DimensionError("adam_step: moment shape mismatch for '" + all[i].name + "'");
    }
  }

  ++state.t;
  const auto& h = state.hyper;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(h.beta1, t);
  const double correction2 = 1.0 - std::pow(h.beta2, t);
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto values = all[i].tensor.mutable_values();
    const auto grad = all[i].tensor.grad();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t k = 0; k < values.size(); ++k) {
      m[k] = h.beta1 * m[k] + (1.0 - h.beta1) * grad[k];
      v[k] = h.beta2 * v[k] + (1.0 - h.beta2) * grad[k] * grad[k];
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      values[k] -= h.lr * m_hat / (std::sqrt(v_hat) + h.eps);
    }
  }
}

}  // namespace hence::ad
