#include "hence/graph/pooling.hpp"

#include <map>
#include <spdlog/spdlog.h>
#include <stdexcept>
#include <string>

#include "hence/autodiff/ops.hpp"
#include "hence/error.hpp"

namespace hence::graph {

Pooling parse_pooling(std::string_view name) {
  if (name == "mean") return Pooling::mean;
  if (name == "sum") return Pooling::sum;
  if (name == "max") return Pooling::max;
  throw std::invalid_argument("unknown pooling function '" + std::string(name) +
                              "' (expected mean, sum or max)");
}

std::string_view pooling_name(Pooling p) {
  switch (p) {
    case Pooling::mean: return "mean";
    case Pooling::sum: return "sum";
    case Pooling::max: return "max";
  }
  return "mean";
}

ad::Tensor pool_rows(Pooling phi, const ad::Tensor& reps, std::span<const std::size_t> groups,
                     std::size_t n_groups) {
  std::vector<std::size_t> counts(n_groups, 0);
  for (std::size_t g : groups) {
    if (g >= n_groups) {
      throw std::out_of_range("pooling: group id " + std::to_string(g) + " >= " +
                              std::to_string(n_groups));
    }
    ++counts[g];
  }
  for (std::size_t g = 0; g < n_groups; ++g) {
    if (counts[g] == 0) spdlog::warn("pooling: group {} is empty, using a zero row", g);
  }
  switch (phi) {
    case Pooling::sum: return ad::segment_sum(reps, groups, n_groups);
    case Pooling::max: return ad::segment_max(reps, groups, n_groups);
    case Pooling::mean: {
      std::vector<double> inv(n_groups, 0.0);
      for (std::size_t g = 0; g < n_groups; ++g)
        if (counts[g] > 0) inv[g] = 1.0 / static_cast<double>(counts[g]);
      return ad::scale_rows(ad::segment_sum(reps, groups, n_groups), inv);
    }
  }
  throw std::invalid_argument("pooling: unknown function");
}

ad::Tensor pool_nodes(Pooling phi, const ad::Tensor& reps, std::span<const std::size_t> groups,
                      std::size_t n_groups) {
  if (groups.size() != reps.rows()) {
    throw DimensionError("pool_nodes: " + std::to_string(groups.size()) + " group ids for " +
                         ad::to_string(reps.shape()));
  }
  return pool_rows(phi, reps, groups, n_groups);
}

ad::Tensor pool_internal_edges(Pooling phi, const ad::Tensor& edge_reps, std::span<const Arc> arcs,
                               std::span<const std::size_t> groups, std::size_t n_groups) {
  if (arcs.size() != edge_reps.rows()) {
    throw DimensionError("pool_internal_edges: " + std::to_string(arcs.size()) + " arcs for " +
                         ad::to_string(edge_reps.shape()));
  }
  std::vector<std::size_t> rows;
  std::vector<std::size_t> owner;
  std::vector<std::size_t> counts(n_groups, 0);
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    const std::size_t gs = groups[arcs[k].src];
    if (gs == groups[arcs[k].dst]) {
      if (gs >= n_groups) throw std::out_of_range("pool_internal_edges: group id out of range");
      rows.push_back(k);
      owner.push_back(gs);
      ++counts[gs];
    }
  }
  if (rows.empty()) return ad::Tensor::zeros({n_groups, edge_reps.cols()});
  const ad::Tensor selected = ad::gather_rows(edge_reps, rows);
  switch (phi) {
    case Pooling::sum: return ad::segment_sum(selected, owner, n_groups);
    case Pooling::max: return ad::segment_max(selected, owner, n_groups);
    case Pooling::mean: {
      std::vector<double> inv(n_groups, 0.0);
      for (std::size_t g = 0; g < n_groups; ++g)
        if (counts[g] > 0) inv[g] = 1.0 / static_cast<double>(counts[g]);
      return ad::scale_rows(ad::segment_sum(selected, owner, n_groups), inv);
    }
  }
  throw std::invalid_argument("pooling: unknown function");
}

CrossLinks pool_all_cross_edges(Pooling phi, const ad::Tensor& edge_reps, std::span<const Arc> arcs,
                                std::span<const std::size_t> groups) {
  if (arcs.size() != edge_reps.rows()) {
    throw DimensionError("pool_cross_edges: " + std::to_string(arcs.size()) + " arcs for " +
                         ad::to_string(edge_reps.shape()));
  }
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> by_pair;
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    std::size_t a = groups[arcs[k].src];
    std::size_t b = groups[arcs[k].dst];
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    by_pair[{a, b}].push_back(k);
  }
  CrossLinks out;
  if (by_pair.empty()) return out;
  std::vector<std::size_t> rows;
  std::vector<std::size_t> owner;
  for (const auto& [pair, ks] : by_pair) {
    for (std::size_t k : ks) {
      rows.push_back(k);
      owner.push_back(out.pairs.size());
    }
    out.pairs.push_back(pair);
  }
  out.pooled = pool_rows(phi, ad::gather_rows(edge_reps, rows), owner, out.pairs.size());
  return out;
}

ad::Tensor pool_cross_edges(Pooling phi, const ad::Tensor& edge_reps, std::span<const Arc> arcs,
                            std::span<const std::size_t> groups,
                            std::pair<std::size_t, std::size_t> pair) {
  if (arcs.size() != edge_reps.rows()) {
    throw DimensionError("pool_cross_edges: " + std::to_string(arcs.size()) + " arcs for " +
                         ad::to_string(edge_reps.shape()));
  }
  const auto [ga, gb] = pair;
  std::vector<std::size_t> rows;
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    const std::size_t s = groups[arcs[k].src];
    const std::size_t d = groups[arcs[k].dst];
    if ((s == ga && d == gb) || (s == gb && d == ga)) rows.push_back(k);
  }
  if (ga == gb || rows.empty()) {
    throw std::invalid_argument("pool_cross_edges: no arc crosses groups " + std::to_string(ga) +
                                " and " + std::to_string(gb));
  }
  const std::vector<std::size_t> owner(rows.size(), 0);
  return pool_rows(phi, ad::gather_rows(edge_reps, rows), owner, 1);
}

}  // namespace hence::graph
