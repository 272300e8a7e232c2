#include "hence/model/prepared.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hence::model {
namespace {

/// Pooled normalized features of the segments joining two regions, keyed by
/// the unordered region pair.
std::map<std::pair<std::int64_t, std::int64_t>, std::vector<double>> region_link_features(
    const data::Dataset& ds, const Normalizer& norm, graph::Pooling phi) {
  constexpr std::size_t kDim = graph::RoadGraph::kEdgeFeatures;
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::array<double, kDim>>> rows;
  for (const auto& s : ds.cross_region_segments) {
    const auto key = std::minmax(ds.hierarchy.region_of_node(s.u), ds.hierarchy.region_of_node(s.v));
    auto f = graph::segment_features(s);
    norm.edge.apply(f);
    rows[key].push_back(f);
  }
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<double>> out;
  for (const auto& [key, list] : rows) {
    std::vector<double> pooled(kDim, phi == graph::Pooling::max ? -std::numeric_limits<double>::infinity() : 0.0);
    for (const auto& f : list) {
      for (std::size_t c = 0; c < kDim; ++c) {
        pooled[c] = phi == graph::Pooling::max ? std::max(pooled[c], f[c]) : pooled[c] + f[c];
      }
    }
    if (phi == graph::Pooling::mean)
      for (double& v : pooled) v /= static_cast<double>(list.size());
    out.emplace(key, std::move(pooled));
  }
  return out;
}

RegionView make_view(const graph::HeteroGraph& g, std::size_t n, std::size_t target, std::size_t layers,
                     bool prune) {
  RegionView view;
  std::vector<std::size_t> local(n, std::numeric_limits<std::size_t>::max());
  if (prune) {
    const auto dist = egat::hops_to_target(n, g.spatial.arcs, g.od.arcs, target);
    for (std::size_t v = 0; v < n; ++v)
      if (dist[v] <= layers) view.nodes.push_back(v);
  } else {
    view.nodes.resize(n);
    for (std::size_t v = 0; v < n; ++v) view.nodes[v] = v;
  }
  for (std::size_t i = 0; i < view.nodes.size(); ++i) local[view.nodes[i]] = i;
  view.target = local[target];

  auto restrict = [&](const graph::TypedEdges& e, std::vector<graph::Arc>& arcs, ad::Tensor& feats) {
    std::vector<std::size_t> rows;
    for (std::size_t k = 0; k < e.arcs.size(); ++k) {
      const auto [s, d] = e.arcs[k];
      if (local[s] == std::numeric_limits<std::size_t>::max() || local[d] == std::numeric_limits<std::size_t>::max()) {
        continue;
      }
      arcs.push_back({local[s], local[d]});
      rows.push_back(k);
    }
    feats = ad::gather_rows(e.feats, rows);
  };
  restrict(g.spatial, view.spatial_arcs, view.spatial_feats);
  restrict(g.od, view.od_arcs, view.od_feats);
  if (prune) {
    view.plan = egat::plan_receptive_field(view.nodes.size(), view.spatial_arcs, view.od_arcs, view.target, layers);
  }
  return view;
}

}  // namespace

std::size_t PreparedData::position(std::int64_t region_id) const {
  const auto it = index.find(region_id);
  if (it == index.end()) throw std::out_of_range("unknown region " + std::to_string(region_id));
  return it->second;
}

std::vector<std::size_t> PreparedData::positions(std::span<const std::int64_t> region_ids) const {
  std::vector<std::size_t> out;
  out.reserve(region_ids.size());
  for (std::int64_t id : region_ids) out.push_back(position(id));
  return out;
}

RegionView PreparedData::full_view(std::size_t target) const {
  return make_view(region_graph, regions.size(), target, config.layers, false);
}

ad::Tensor normalize_flows(const ad::Tensor& raw, const ZScore& z) {
  std::vector<double> v(raw.values().begin(), raw.values().end());
  for (double& f : v) f = z.forward(std::log1p(f));
  return ad::Tensor::from(raw.shape(), std::move(v));
}

PreparedData prepare(const data::Dataset& ds, const Normalizer& normalizer, const ModelConfig& config) {
  config.validate();
  PreparedData out;
  out.config = config;
  out.normalizer = normalizer;

  std::map<std::int64_t, std::vector<graph::LocalFlow>> community_od;
  std::map<std::int64_t, std::map<std::int64_t, std::size_t>> community_local;
  for (const auto& g : ds.regions) {
    PreparedRegion pr;
    pr.region_id = g.region_id;
    pr.community_ids = ds.hierarchy.communities_of(g.region_id);
    auto& local = community_local[g.region_id];
    for (std::size_t c = 0; c < pr.community_ids.size(); ++c) local[pr.community_ids[c]] = c;

    auto nf = g.node_features();
    normalizer.node.apply(nf);
    pr.node_feats = ad::Tensor::from({g.node_count(), graph::RoadGraph::kNodeFeatures}, std::move(nf));
    auto ef = g.arc_features();
    normalizer.edge.apply(ef);
    pr.edge_feats = ad::Tensor::from({g.arcs.size(), graph::RoadGraph::kEdgeFeatures}, std::move(ef));
    pr.arcs = g.arcs;
    pr.node_community.reserve(g.node_count());
    for (const auto& n : g.intersections) pr.node_community.push_back(local.at(ds.hierarchy.node_to_community.at(n.id)));
    out.index[g.region_id] = out.regions.size();
    out.regions.push_back(std::move(pr));
  }

  std::vector<graph::LocalFlow> region_od;
  for (const auto& f : ds.od) {
    if (f.level == graph::Level::community) {
      const std::int64_t ro = ds.hierarchy.community_to_region.at(f.origin);
      if (ro != ds.hierarchy.community_to_region.at(f.dest)) continue;
      const auto& local = community_local.at(ro);
      out.regions[out.index.at(ro)].community_od.push_back({local.at(f.origin), local.at(f.dest), f.flow});
    } else {
      region_od.push_back({out.index.at(f.origin), out.index.at(f.dest), f.flow});
    }
  }
  if (!config.od_links()) {
    for (auto& pr : out.regions) pr.community_od.clear();
    region_od.clear();
  }

  const auto link_feats = region_link_features(ds, normalizer, config.pooling);
  std::vector<graph::AreaLink> links;
  if (config.spatial_links()) {
    for (const auto& [a, b] : ds.region_adjacency) {
      graph::AreaLink link{out.index.at(a), out.index.at(b), {}};
      const auto it = link_feats.find(std::minmax(a, b));
      if (it != link_feats.end()) link.feature = it->second;
      links.push_back(std::move(link));
    }
  }
  const std::size_t n = out.regions.size();
  out.region_graph = graph::build_region_graph(ad::Tensor::zeros({n, 1}), links, graph::RoadGraph::kEdgeFeatures,
                                               region_od, config.min_flow);
  out.region_graph.node_feats = ad::Tensor();
  out.region_graph.od.feats = normalize_flows(out.region_graph.od.feats, normalizer.region_flow);

  if (config.region_level()) {
    out.views.reserve(n);
    for (std::size_t r = 0; r < n; ++r) out.views.push_back(make_view(out.region_graph, n, r, config.layers, true));
  }
  for (const auto& [region, y] : ds.labels) out.labels[region] = normalizer.label_forward(y);
  return out;
}

}  // namespace hence::model
