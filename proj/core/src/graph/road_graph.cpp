#include "hence/graph/road_graph.hpp"

#include <string>

#include "hence/error.hpp"

namespace hence::graph {

RoadClass parse_road_class(std::string_view name) {
  for (RoadClass c : kAllRoadClasses)
    if (road_class_name(c) == name) return c;
  return RoadClass::other;
}

std::string_view road_class_name(RoadClass c) {
  switch (c) {
    case RoadClass::motorway: return "motorway";
    case RoadClass::primary: return "primary";
    case RoadClass::secondary: return "secondary";
    case RoadClass::residential: return "residential";
    case RoadClass::other: return "other";
  }
  return "other";
}

std::size_t RoadGraph::index_of(std::int64_t node_id) const {
  const auto it = index.find(node_id);
  if (it == index.end()) {
    throw std::out_of_range("region " + std::to_string(region_id) + " has no node " +
                            std::to_string(node_id));
  }
  return it->second;
}

std::vector<double> RoadGraph::node_features() const {
  std::vector<double> out;
  out.reserve(intersections.size() * kNodeFeatures);
  for (std::size_t i = 0; i < intersections.size(); ++i) {
    out.push_back(intersections[i].rel_lon);
    out.push_back(intersections[i].rel_lat);
    out.push_back(static_cast<double>(degree[i]));
  }
  return out;
}

std::array<double, RoadGraph::kEdgeFeatures> segment_features(const Segment& s) {
  std::array<double, RoadGraph::kEdgeFeatures> row{};
  row[0] = s.rel_lon;
  row[1] = s.rel_lat;
  row[2] = s.length_km;
  row[3 + static_cast<std::size_t>(s.road_class)] = 1.0;
  return row;
}

std::vector<double> RoadGraph::arc_features() const {
  std::vector<double> out;
  out.reserve(arcs.size() * kEdgeFeatures);
  for (const auto& s : segments) {
    const auto row = segment_features(s);
    out.insert(out.end(), row.begin(), row.end());
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

RoadGraph build_road_graph(std::int64_t region_id, std::vector<Intersection> intersections,
                           std::vector<Segment> segments) {
  RoadGraph g;
  g.region_id = region_id;
  std::vector<std::string> issues;
  const std::string where = "region " + std::to_string(region_id) + ": ";

  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  for (std::size_t i = 0; i < intersections.size(); ++i) {
    const auto& n = intersections[i];
    if (!g.index.emplace(n.id, i).second) {
      issues.push_back(where + "duplicate node id " + std::to_string(n.id));
    }
    if (!in_unit(n.rel_lon) || !in_unit(n.rel_lat)) {
      issues.push_back(where + "node " + std::to_string(n.id) + " has coordinates outside [0,1]");
    }
  }
  g.degree.assign(intersections.size(), 0);
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& s = segments[k];
    const std::string seg = where + "segment " + std::to_string(k) + " (" + std::to_string(s.u) +
                            "-" + std::to_string(s.v) + ")";
    const auto iu = g.index.find(s.u);
    const auto iv = g.index.find(s.v);
    if (iu == g.index.end()) issues.push_back(seg + " references missing node " + std::to_string(s.u));
    if (iv == g.index.end()) issues.push_back(seg + " references missing node " + std::to_string(s.v));
    if (s.u == s.v) issues.push_back(seg + " is a self-loop");
    if (!(s.length_km > 0.0)) issues.push_back(seg + " has non-positive length");
    if (!in_unit(s.rel_lon) || !in_unit(s.rel_lat)) issues.push_back(seg + " has coordinates outside [0,1]");
    if (iu != g.index.end() && iv != g.index.end()) {
      g.arcs.push_back({iu->second, iv->second});
      g.arcs.push_back({iv->second, iu->second});
      ++g.degree[iu->second];
      ++g.degree[iv->second];
    }
  }
  if (!issues.empty()) throw ValidationError("invalid road graph:", std::move(issues));

  g.intersections = std::move(intersections);
  g.segments = std::move(segments);
  return g;
}

bool is_connected(const RoadGraph& g) {
  const std::size_t n = g.node_count();
  if (n == 0) return true;
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& a : g.arcs) adj[a.src].push_back(a.dst);
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t visited = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++visited;
        stack.push_back(v);
      }
    }
  }
  return visited == n;
}

}  // namespace hence::graph
