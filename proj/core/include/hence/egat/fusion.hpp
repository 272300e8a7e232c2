#pragma once

#include <random>
#include <span>
#include <string>

#include "hence/autodiff/parameter.hpp"

namespace hence::egat {

/// Scores each candidate representation with c^T tanh(W v + b).
///   c: d x 1, W: d x d, b: scalar
struct FusionParams {
  ad::Tensor c;
  ad::Tensor W;
  ad::Tensor b;
};

FusionParams make_fusion_params(ad::ParameterSet& params, const std::string& prefix, std::size_t dim,
                                std::mt19937_64& rng);

struct FusionOutput {
  ad::Tensor fused;   // N x d
  ad::Tensor beta;    // N x |inputs|, rows sum to one
  ad::Tensor scores;  // N x |inputs|, pre-softmax
};

/// Per-node scalar score for each input, softmax across inputs, then the
/// beta-weighted sum of the inputs. All inputs share one parameter set.
FusionOutput attention_fusion(std::span<const ad::Tensor> inputs, const FusionParams& params);

}  // namespace hence::egat
