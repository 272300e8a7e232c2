#include "hence/egat/fusion.hpp"

#include "hence/autodiff/ops.hpp"
#include "hence/error.hpp"

namespace hence::egat {

FusionParams make_fusion_params(ad::ParameterSet& params, const std::string& prefix, std::size_t dim,
                                std::mt19937_64& rng) {
  FusionParams p;
  p.c = params.add(prefix + ".c", {dim, 1}, {}, rng);
  p.W = params.add(prefix + ".W", {dim, dim}, {}, rng);
  p.b = params.add(prefix + ".b", {1, 1}, {ad::InitKind::zeros, 0, 0}, rng);
  return p;
}

FusionOutput attention_fusion(std::span<const ad::Tensor> inputs, const FusionParams& params) {
  if (inputs.size() < 2) throw std::invalid_argument("attention_fusion: need at least two inputs");
  const ad::Shape shape = inputs.front().shape();
  for (const auto& t : inputs) {
    if (t.shape() != shape) {
      throw DimensionError("attention_fusion: input " + ad::to_string(t.shape()) + " differs from " +
                           ad::to_string(shape));
    }
  }
  if (params.W.rows() != shape.cols || params.c.rows() != shape.cols) {
    throw DimensionError("attention_fusion: parameters sized for " +
                         std::to_string(params.W.rows()) + " features, inputs have " +
                         std::to_string(shape.cols));
  }

  std::vector<ad::Tensor> score_columns;
  score_columns.reserve(inputs.size());
  for (const auto& v : inputs) {
    score_columns.push_back(
        ad::matmul(ad::tanh(ad::add_scalar(ad::matmul(v, params.W), params.b)), params.c));
  }
  FusionOutput out;
  out.scores = ad::concat_columns(score_columns);
  out.beta = ad::row_softmax(out.scores);
  ad::Tensor fused;
  for (std::size_t m = 0; m < inputs.size(); ++m) {
    const ad::Tensor term = ad::mul_column(inputs[m], ad::slice_columns(out.beta, m, 1));
    fused = fused.defined() ? ad::add(fused, term) : term;
  }
  out.fused = fused;
  return out;
}

}  // namespace hence::egat
