#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "hence/autodiff/tensor.hpp"
#include "hence/graph/pooling.hpp"
#include "hence/graph/road_graph.hpp"

namespace hence::graph {

enum class Level { community, region };
std::string_view level_name(Level level);

/// Arcs of one edge type and their feature rows (aligned by index).
struct TypedEdges {
  std::vector<Arc> arcs;
  ad::Tensor feats;
  [[nodiscard]] std::size_t size() const { return arcs.size(); }
};

/// One level's graph: area nodes plus spatial links and OD links.
/// OD features hold the raw flow (one column) until the model embeds them.
struct HeteroGraph {
  Level level{Level::community};
  ad::Tensor node_feats;
  TypedEdges spatial;
  TypedEdges od;

  [[nodiscard]] std::size_t node_count() const { return node_feats.rows(); }
};

/// OD record expressed in the level's local area indices.
struct LocalFlow {
  std::size_t origin{0};
  std::size_t dest{0};
  double flow{0.0};
};

/// Declared adjacency between two areas. An empty feature means a zero vector.
struct AreaLink {
  std::size_t a{0};
  std::size_t b{0};
  std::vector<double> feature;
};

/// Community-level graph of one region. A spatial link joins every community
/// pair crossed by at least one road arc; its feature is the pooled crossing
/// representation, shared by both directions. One OD arc per record with
/// flow > min_flow.
HeteroGraph build_community_graph(Pooling phi, ad::Tensor node_feats, const ad::Tensor& road_edge_reps,
                                  std::span<const Arc> road_arcs,
                                  std::span<const std::size_t> node_to_community,
                                  std::span<const LocalFlow> od, double min_flow = 0.0);

/// Region-level graph. Each adjacency record yields two symmetric spatial arcs.
HeteroGraph build_region_graph(ad::Tensor node_feats, std::span<const AreaLink> adjacency,
                               std::size_t spatial_dim, std::span<const LocalFlow> od,
                               double min_flow = 0.0);

/// Throws ValidationError when an invariant is broken (endpoint range,
/// spatial symmetry, duplicate arcs, feature row counts).
void validate(const HeteroGraph& g);

}  // namespace hence::graph
