#include "hence/graph/hetero_graph.hpp"

#include <set>
#include <stdexcept>
#include <string>
#include <utility>

#include "hence/autodiff/ops.hpp"
#include "hence/error.hpp"

namespace hence::graph {
namespace {

TypedEdges build_od_edges(std::size_t n_nodes, std::span<const LocalFlow> od, double min_flow) {
  TypedEdges out;
  std::vector<double> flows;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& rec : od) {
    if (rec.origin >= n_nodes || rec.dest >= n_nodes) {
      throw std::out_of_range("OD record " + std::to_string(rec.origin) + " -> " +
                              std::to_string(rec.dest) + " references an unknown area (" +
                              std::to_string(n_nodes) + " areas)");
    }
    if (rec.origin == rec.dest) {
      throw std::invalid_argument("OD record with identical origin and destination " +
                                  std::to_string(rec.origin));
    }
    if (rec.flow < 0.0) throw std::invalid_argument("OD record with negative flow");
    if (!(rec.flow > min_flow)) continue;
    if (!seen.emplace(rec.origin, rec.dest).second) {
      throw std::invalid_argument("duplicate OD record " + std::to_string(rec.origin) + " -> " +
                                  std::to_string(rec.dest));
    }
    out.arcs.push_back({rec.origin, rec.dest});
    flows.push_back(rec.flow);
  }
  out.feats = ad::Tensor::column(std::move(flows));
  return out;
}

}  // namespace

std::string_view level_name(Level level) {
  return level == Level::community ? "community" : "region";
}

HeteroGraph build_community_graph(Pooling phi, ad::Tensor node_feats, const ad::Tensor& road_edge_reps,
                                  std::span<const Arc> road_arcs,
                                  std::span<const std::size_t> node_to_community,
                                  std::span<const LocalFlow> od, double min_flow) {
  HeteroGraph g;
  g.level = Level::community;
  const std::size_t n = node_feats.rows();
  g.node_feats = std::move(node_feats);

  const CrossLinks links = pool_all_cross_edges(phi, road_edge_reps, road_arcs, node_to_community);
  std::vector<std::size_t> rows;
  for (std::size_t p = 0; p < links.pairs.size(); ++p) {
    const auto [a, b] = links.pairs[p];
    if (a >= n || b >= n) throw std::out_of_range("community index outside node feature rows");
    g.spatial.arcs.push_back({a, b});
    g.spatial.arcs.push_back({b, a});
    rows.push_back(p);
    rows.push_back(p);
  }
  g.spatial.feats = rows.empty() ? ad::Tensor::zeros({0, road_edge_reps.cols()})
                                 : ad::gather_rows(links.pooled, rows);
  g.od = build_od_edges(n, od, min_flow);
  return g;
}

HeteroGraph build_region_graph(ad::Tensor node_feats, std::span<const AreaLink> adjacency,
                               std::size_t spatial_dim, std::span<const LocalFlow> od,
                               double min_flow) {
  HeteroGraph g;
  g.level = Level::region;
  const std::size_t n = node_feats.rows();
  g.node_feats = std::move(node_feats);

  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<double> feats;
  for (const auto& link : adjacency) {
    if (link.a >= n || link.b >= n) {
      throw std::out_of_range("adjacency record references an unknown area");
    }
    if (link.a == link.b) throw std::invalid_argument("adjacency record links an area to itself");
    if (!link.feature.empty() && link.feature.size() != spatial_dim) {
      throw DimensionError("adjacency feature has " + std::to_string(link.feature.size()) +
                           " values, expected " + std::to_string(spatial_dim));
    }
    const auto key = std::minmax(link.a, link.b);
    if (!seen.insert(key).second) continue;
    for (const Arc arc : {Arc{link.a, link.b}, Arc{link.b, link.a}}) {
      g.spatial.arcs.push_back(arc);
      if (link.feature.empty()) {
        feats.insert(feats.end(), spatial_dim, 0.0);
      } else {
        feats.insert(feats.end(), link.feature.begin(), link.feature.end());
      }
    }
  }
  g.spatial.feats = ad::Tensor::from({g.spatial.arcs.size(), spatial_dim}, std::move(feats));
  g.od = build_od_edges(n, od, min_flow);
  return g;
}

void validate(const HeteroGraph& g) {
  std::vector<std::string> issues;
  const std::size_t n = g.node_count();
  auto check_type = [&](const TypedEdges& e, const char* name) {
    std::set<std::pair<std::size_t, std::size_t>> arcs;
    for (const auto& a : e.arcs) {
      if (a.src >= n || a.dst >= n) {
        issues.push_back(std::string(name) + " arc " + std::to_string(a.src) + "->" +
                         std::to_string(a.dst) + " outside " + std::to_string(n) + " nodes");
      }
      if (!arcs.emplace(a.src, a.dst).second) {
        issues.push_back(std::string(name) + " arc " + std::to_string(a.src) + "->" +
                         std::to_string(a.dst) + " duplicated");
      }
    }
    if (e.feats.defined() && e.feats.rows() != e.arcs.size()) {
      issues.push_back(std::string(name) + " features have " + std::to_string(e.feats.rows()) +
                       " rows for " + std::to_string(e.arcs.size()) + " arcs");
    }
    return arcs;
  };
  const auto spatial = check_type(g.spatial, "spatial");
  check_type(g.od, "od");
  for (const auto& [a, b] : spatial) {
    if (!spatial.count({b, a})) {
      issues.push_back("spatial arc " + std::to_string(a) + "->" + std::to_string(b) +
                       " has no reverse");
    }
  }
  if (!issues.empty()) throw ValidationError("invalid heterogeneous graph:", std::move(issues));
}

}  // namespace hence::graph
