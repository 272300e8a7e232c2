#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hence/autodiff/ops.hpp"
#include "hence/autodiff/parameter.hpp"
#include "hence/graph/road_graph.hpp"

namespace hence::egat {

using graph::Arc;

struct EgatDims {
  std::size_t node_in{0};
  std::size_t edge_in{0};
  std::size_t node_out{0};
  std::size_t edge_out{0};
  std::size_t attention{0};

  /// Width of the [V_i || E_ij || V_j] concatenation.
  [[nodiscard]] std::size_t concat_width() const { return 2 * node_in + edge_in; }
};

/// Weights of one edge-featured attention layer.
///   W: node_in x node_out       node transform
///   U: concat x attention       pre-attention transform
///   a: attention x 1            attention vector
///   A: concat x edge_out        edge update (undefined when the layer's
///                               edge output is never consumed)
struct EgatParams {
  ad::Tensor W;
  ad::Tensor U;
  ad::Tensor a;
  ad::Tensor A;

  [[nodiscard]] bool updates_edges() const { return A.defined(); }
  [[nodiscard]] EgatDims dims() const;
};

EgatParams make_egat_params(ad::ParameterSet& params, const std::string& prefix, EgatDims dims,
                            bool edge_update, std::mt19937_64& rng);

struct EgatOptions {
  double slope{ad::kLeakySlope};
  /// Arc positions whose updated features are wanted; all arcs when unset.
  std::optional<std::vector<std::size_t>> edge_rows;
};

struct EgatOutput {
  ad::Tensor nodes;  // N x node_out
  ad::Tensor edges;  // |edge_rows| x edge_out, undefined without an edge update
  /// Attention per arc: the M given arcs first, then one self-loop per node.
  ad::Tensor alpha;
  std::vector<std::size_t> alpha_dst;  // destination node of each alpha row
};

/// One EGAT convolution. Every node receives a self-loop with a zero edge
/// feature, so isolated nodes keep their transformed signal.
///   h_ij   = LeakyReLU(a^T U [V_i || E_ij || V_j])
///   alpha  = softmax of h over each destination i's incoming arcs
///   V'_i   = sum_j alpha_ij W V_j
///   E'_ij  = A [V_i || E_ij || V_j]       (self-loops excluded)
EgatOutput egat_layer(const ad::Tensor& nodes, const ad::Tensor& edges, std::span<const Arc> arcs,
                      const EgatParams& params, const EgatOptions& options = {});

struct EgatStackOutput {
  ad::Tensor nodes;
  ad::Tensor edges;
  std::vector<ad::Tensor> alphas;
};

/// Homogeneous stack: layer l consumes layer l-1's node and edge outputs.
EgatStackOutput stack_egat(const ad::Tensor& nodes, const ad::Tensor& edges,
                           std::span<const Arc> arcs, std::span<const EgatParams> layers,
                           double slope = ad::kLeakySlope);

}  // namespace hence::egat
