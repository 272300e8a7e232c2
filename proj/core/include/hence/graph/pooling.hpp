#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "hence/autodiff/tensor.hpp"
#include "hence/graph/road_graph.hpp"

namespace hence::graph {

enum class Pooling { mean, sum, max };

/// Throws std::invalid_argument on an unknown name.
Pooling parse_pooling(std::string_view name);
std::string_view pooling_name(Pooling p);

/// Group-wise reduction of rows. Empty groups give zero rows (with a warning).
ad::Tensor pool_rows(Pooling phi, const ad::Tensor& reps, std::span<const std::size_t> groups,
                     std::size_t n_groups);

/// Pools node representations by group membership.
ad::Tensor pool_nodes(Pooling phi, const ad::Tensor& reps, std::span<const std::size_t> groups,
                      std::size_t n_groups);

/// Pools arcs whose endpoints both lie in the same group.
ad::Tensor pool_internal_edges(Pooling phi, const ad::Tensor& edge_reps, std::span<const Arc> arcs,
                               std::span<const std::size_t> groups, std::size_t n_groups);

/// Pools arcs running between group a and group b, in either direction.
/// Throws std::invalid_argument when no arc crosses the pair.
ad::Tensor pool_cross_edges(Pooling phi, const ad::Tensor& edge_reps, std::span<const Arc> arcs,
                            std::span<const std::size_t> groups, std::pair<std::size_t, std::size_t> pair);

/// Unordered group pairs joined by at least one arc, sorted, with the pooled
/// crossing representation of each pair as the rows of `pooled`.
struct CrossLinks {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  ad::Tensor pooled;
};

CrossLinks pool_all_cross_edges(Pooling phi, const ad::Tensor& edge_reps, std::span<const Arc> arcs,
                                std::span<const std::size_t> groups);

}  // namespace hence::graph
