#include "hence/egat/hetero_layer.hpp"

#include <deque>
#include <limits>
#include <stdexcept>

#include "hence/error.hpp"

namespace hence::egat {
namespace {

constexpr auto kFar = std::numeric_limits<std::size_t>::max();

std::vector<Arc> select_arcs(std::span<const Arc> arcs, const std::vector<std::size_t>& idx) {
  std::vector<Arc> out;
  out.reserve(idx.size());
  for (std::size_t k : idx) out.push_back(arcs[k]);
  return out;
}

/// Positions of `next` (a subset of `current`, both ascending) within `current`.
std::vector<std::size_t> positions_within(const std::vector<std::size_t>& current,
                                          const std::vector<std::size_t>& next) {
  std::vector<std::size_t> out;
  out.reserve(next.size());
  std::size_t p = 0;
  for (std::size_t k : next) {
    while (p < current.size() && current[p] < k) ++p;
    if (p == current.size() || current[p] != k) {
      throw std::logic_error("stack plan: later layer uses an arc dropped earlier");
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace

HeteroLayerOutput hetero_layer(const ad::Tensor& nodes, std::span<const Arc> spatial_arcs,
                               const ad::Tensor& spatial_feats, std::span<const Arc> od_arcs,
                               const ad::Tensor& od_feats, const HeteroLayerParams& params,
                               const HeteroLayerOptions& options) {
  if (!params.spatial && !params.od) {
    throw std::invalid_argument("hetero_layer: no edge type enabled");
  }
  HeteroLayerOutput out;
  std::optional<EgatOutput> spatial;
  std::optional<EgatOutput> od;
  if (params.spatial) {
    spatial = egat_layer(nodes, spatial_feats, spatial_arcs, *params.spatial,
                         {options.slope, options.spatial_edge_rows});
    out.spatial_edges = spatial->edges;
    out.spatial_alpha = spatial->alpha;
  }
  if (params.od) {
    od = egat_layer(nodes, od_feats, od_arcs, *params.od, {options.slope, options.od_edge_rows});
    out.od_edges = od->edges;
    out.od_alpha = od->alpha;
  }

  const std::size_t n = nodes.rows();
  if (spatial && od) {
    if (!params.fusion) throw std::invalid_argument("hetero_layer: two edge types need fusion parameters");
    const ad::Tensor inputs[] = {spatial->nodes, od->nodes};
    FusionOutput fused = attention_fusion(inputs, *params.fusion);
    out.nodes = fused.fused;
    out.beta = fused.beta;
  } else {
    out.nodes = spatial ? spatial->nodes : od->nodes;
    std::vector<double> beta(2 * n, 0.0);
    const std::size_t col = spatial ? kSpatialColumn : kOdColumn;
    for (std::size_t i = 0; i < n; ++i) beta[2 * i + col] = 1.0;
    out.beta = ad::Tensor::from({n, 2}, std::move(beta));
  }
  return out;
}

std::vector<std::size_t> hops_to_target(std::size_t n_nodes, std::span<const Arc> spatial_arcs,
                                        std::span<const Arc> od_arcs, std::size_t target) {
  if (target >= n_nodes) throw std::out_of_range("hops_to_target: target outside graph");
  std::vector<std::vector<std::size_t>> incoming(n_nodes);
  for (auto arcs : {spatial_arcs, od_arcs})
    for (const auto& a : arcs) incoming[a.dst].push_back(a.src);
  std::vector<std::size_t> dist(n_nodes, kFar);
  std::deque<std::size_t> queue{target};
  dist[target] = 0;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t u : incoming[v]) {
      if (dist[u] == kFar) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  return dist;
}

StackPlan plan_receptive_field(std::size_t n_nodes, std::span<const Arc> spatial_arcs,
                               std::span<const Arc> od_arcs, std::size_t target,
                               std::size_t layers) {
  const auto dist = hops_to_target(n_nodes, spatial_arcs, od_arcs, target);
  StackPlan plan;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t radius = layers - 1 - l;
    auto keep = [&](std::span<const Arc> arcs) {
      std::vector<std::size_t> idx;
      for (std::size_t k = 0; k < arcs.size(); ++k)
        if (dist[arcs[k].dst] <= radius) idx.push_back(k);
      return idx;
    };
    plan.spatial.push_back(keep(spatial_arcs));
    plan.od.push_back(keep(od_arcs));
  }
  return plan;
}

HeteroStackOutput stack_hetero(const graph::HeteroGraph& g, std::span<const HeteroLayerParams> layers,
                               const StackPlan* plan, double slope) {
  if (layers.empty()) throw std::invalid_argument("stack_hetero: need at least one layer");
  if (plan && (plan->spatial.size() != layers.size() || plan->od.size() != layers.size())) {
    throw std::invalid_argument("stack_hetero: plan depth does not match layer count");
  }
  HeteroStackOutput out;
  ad::Tensor nodes = g.node_feats;
  ad::Tensor spatial_feats = g.spatial.feats;
  ad::Tensor od_feats = g.od.feats;
  std::vector<Arc> spatial_arcs = g.spatial.arcs;
  std::vector<Arc> od_arcs = g.od.arcs;
  if (plan) {
    spatial_arcs = select_arcs(g.spatial.arcs, plan->spatial[0]);
    od_arcs = select_arcs(g.od.arcs, plan->od[0]);
    if (spatial_feats.defined()) spatial_feats = ad::gather_rows(spatial_feats, plan->spatial[0]);
    if (od_feats.defined()) od_feats = ad::gather_rows(od_feats, plan->od[0]);
  }

  for (std::size_t l = 0; l < layers.size(); ++l) {
    HeteroLayerOptions options;
    options.slope = slope;
    const bool last = l + 1 == layers.size();
    if (plan) {
      if (last) {
        options.spatial_edge_rows.emplace();
        options.od_edge_rows.emplace();
      } else {
        options.spatial_edge_rows = positions_within(plan->spatial[l], plan->spatial[l + 1]);
        options.od_edge_rows = positions_within(plan->od[l], plan->od[l + 1]);
      }
    }
    HeteroLayerOutput step =
        hetero_layer(nodes, spatial_arcs, spatial_feats, od_arcs, od_feats, layers[l], options);
    nodes = step.nodes;
    out.betas.push_back(step.beta);
    if (last) break;
    spatial_feats = step.spatial_edges;
    od_feats = step.od_edges;
    if (plan) {
      spatial_arcs = select_arcs(g.spatial.arcs, plan->spatial[l + 1]);
      od_arcs = select_arcs(g.od.arcs, plan->od[l + 1]);
    }
  }
  out.nodes = nodes;
  return out;
}

}  // namespace hence::egat
