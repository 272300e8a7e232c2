#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "hence/autodiff/tensor.hpp"
#include "hence/data/dataset.hpp"
#include "hence/egat/hetero_layer.hpp"
#include "hence/graph/hetero_graph.hpp"
#include "hence/model/config.hpp"
#include "hence/model/normalizer.hpp"

namespace hence::model {

/// Constant, normalized inputs of one region's road network.
struct PreparedRegion {
  std::int64_t region_id{0};
  ad::Tensor node_feats;  // N x 3
  ad::Tensor edge_feats;  // arcs x 8, one row per directed arc
  std::vector<graph::Arc> arcs;
  std::vector<std::size_t> node_community;  // local community index per node
  std::vector<std::int64_t> community_ids;  // ascending
  std::vector<graph::LocalFlow> community_od;  // raw flows, local indices
};

/// Part of the region graph that can influence one target's output after the
/// configured number of layers, re-indexed, with the arcs each layer needs.
struct RegionView {
  std::vector<std::size_t> nodes;  // region indices, ascending
  std::size_t target{0};           // position of the target within `nodes`
  std::vector<graph::Arc> spatial_arcs;
  ad::Tensor spatial_feats;
  std::vector<graph::Arc> od_arcs;
  ad::Tensor od_feats;  // normalized log flow, one column
  egat::StackPlan plan;
};

struct PreparedData {
  ModelConfig config;
  Normalizer normalizer;
  std::vector<PreparedRegion> regions;  // dataset order
  std::map<std::int64_t, std::size_t> index;
  /// Region-level arcs over all regions; node features are left undefined.
  graph::HeteroGraph region_graph;
  std::vector<RegionView> views;  // one per region when the region level is active
  std::map<std::int64_t, double> labels;  // normalized

  [[nodiscard]] std::size_t size() const { return regions.size(); }
  [[nodiscard]] std::size_t position(std::int64_t region_id) const;
  [[nodiscard]] std::vector<std::size_t> positions(std::span<const std::int64_t> region_ids) const;
  /// View covering every region, without pruning.
  [[nodiscard]] RegionView full_view(std::size_t target) const;
};

/// Log-transforms and standardizes a column of raw flows.
ad::Tensor normalize_flows(const ad::Tensor& raw, const ZScore& z);

/// Applies the normalizer, drops edge types removed by the ablation and
/// precomputes the per-target region views.
PreparedData prepare(const data::Dataset& ds, const Normalizer& normalizer, const ModelConfig& config);

}  // namespace hence::model
