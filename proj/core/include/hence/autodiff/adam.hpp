#pragma once

#include <cstdint>
#include <vector>

#include "hence/autodiff/parameter.hpp"

namespace hence::ad {

struct AdamHyper {
  double lr{1e-3};
  double beta1{0.9};
  double beta2{0.999};
  double eps{1e-8};
};

/// First/second moment buffers, one slot per parameter in ParameterSet order.
struct AdamState {
  AdamHyper hyper;
  std::uint64_t t{0};
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

AdamState make_adam_state(const ParameterSet& params, AdamHyper hyper = {});

/// One bias-corrected Adam update. Gradients are left untouched.
void adam_step(ParameterSet& params, AdamState& state);

}  // namespace hence::ad
