#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hence/egat/egat_layer.hpp"
#include "hence/egat/fusion.hpp"
#include "hence/graph/hetero_graph.hpp"

namespace hence::egat {

/// Column order of the per-node fusion weights recorded by hetero layers.
inline constexpr std::size_t kSpatialColumn = 0;
inline constexpr std::size_t kOdColumn = 1;

/// One heterogeneous layer. A missing edge type is removed from the layer
/// entirely; fusion parameters exist only when both types are present.
struct HeteroLayerParams {
  std::optional<EgatParams> spatial;
  std::optional<EgatParams> od;
  std::optional<FusionParams> fusion;
};

struct HeteroLayerOptions {
  double slope{ad::kLeakySlope};
  std::optional<std::vector<std::size_t>> spatial_edge_rows;
  std::optional<std::vector<std::size_t>> od_edge_rows;
};

struct HeteroLayerOutput {
  ad::Tensor nodes;
  ad::Tensor spatial_edges;
  ad::Tensor od_edges;
  /// N x 2 fusion weights (spatial, od). A lone surviving type gets weight 1.
  ad::Tensor beta;
  ad::Tensor spatial_alpha;
  ad::Tensor od_alpha;
};

/// Runs the EGAT layer once per edge type over shared node features, then
/// fuses the two node outputs with attention.
HeteroLayerOutput hetero_layer(const ad::Tensor& nodes, std::span<const Arc> spatial_arcs,
                               const ad::Tensor& spatial_feats, std::span<const Arc> od_arcs,
                               const ad::Tensor& od_feats, const HeteroLayerParams& params,
                               const HeteroLayerOptions& options = {});

/// Per-layer arc subsets (indices into the full arc lists) that suffice to
/// produce one target node's output. Layer l keeps the arcs whose destination
/// lies within (layers - 1 - l) hops of the target.
struct StackPlan {
  std::vector<std::vector<std::size_t>> spatial;
  std::vector<std::vector<std::size_t>> od;
};

StackPlan plan_receptive_field(std::size_t n_nodes, std::span<const Arc> spatial_arcs,
                               std::span<const Arc> od_arcs, std::size_t target,
                               std::size_t layers);

/// Hop distance of every node to `target` along arc direction; unreachable
/// nodes get SIZE_MAX.
std::vector<std::size_t> hops_to_target(std::size_t n_nodes, std::span<const Arc> spatial_arcs,
                                        std::span<const Arc> od_arcs, std::size_t target);

struct HeteroStackOutput {
  ad::Tensor nodes;
  std::vector<ad::Tensor> betas;
};

/// L sequential hetero layers; layer l consumes layer l-1's node output and
/// per-type edge outputs. With a plan, only the rows needed for the planned
/// target are guaranteed to be correct.
HeteroStackOutput stack_hetero(const graph::HeteroGraph& g, std::span<const HeteroLayerParams> layers,
                               const StackPlan* plan = nullptr, double slope = ad::kLeakySlope);

}  // namespace hence::egat
