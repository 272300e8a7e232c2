#include "hence/data/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_map>

namespace hence::data {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double rel_distance(const graph::Intersection& a, const graph::Intersection& b) {
  return std::hypot(a.rel_lon - b.rel_lon, a.rel_lat - b.rel_lat);
}

/// Median km per unit of relative distance over the region's segments.
double km_per_unit(const graph::RoadGraph& g) {
  std::vector<double> ratios;
  for (const auto& s : g.segments) {
    const double d = rel_distance(g.intersections[g.index_of(s.u)], g.intersections[g.index_of(s.v)]);
    if (d > 0.0) ratios.push_back(s.length_km / d);
  }
  if (ratios.empty()) return 1.0;
  const auto mid = ratios.begin() + static_cast<std::ptrdiff_t>(ratios.size() / 2);
  std::nth_element(ratios.begin(), mid, ratios.end());
  return *mid;
}

/// Route emissions from one source with a straight-line fallback.
struct Router {
  const graph::RoadGraph& g;
  const RoadClassTable& table;
  std::vector<std::string>& warnings;
  std::unordered_map<std::size_t, std::vector<double>> cache;
  double fallback_scale{0.0};

  double emission(std::size_t from, std::size_t to) {
    auto it = cache.find(from);
    if (it == cache.end()) it = cache.emplace(from, route_emissions(g, from, table)).first;
    const double e = it->second[to];
    if (std::isfinite(e)) return e;
    if (fallback_scale == 0.0) fallback_scale = km_per_unit(g) * table.worst_factor();
    warnings.push_back("region " + std::to_string(g.region_id) + ": no route from node " +
                       std::to_string(g.intersections[from].id) + " to " +
                       std::to_string(g.intersections[to].id) + ", using straight-line distance");
    return rel_distance(g.intersections[from], g.intersections[to]) * fallback_scale;
  }
};

}  // namespace

double RoadClassTable::worst_factor() const {
  return *std::max_element(emission_kg_per_km.begin(), emission_kg_per_km.end());
}

std::vector<double> route_emissions(const graph::RoadGraph& g, std::size_t source, const RoadClassTable& t) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<std::size_t>> out_arcs(n);
  for (std::size_t k = 0; k < g.arcs.size(); ++k) out_arcs[g.arcs[k].src].push_back(k);

  std::vector<double> time(n, kInf);
  std::vector<double> emission(n, kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  time[source] = 0.0;
  emission[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [t_u, u] = queue.top();
    queue.pop();
    if (t_u > time[u]) continue;
    for (std::size_t k : out_arcs[u]) {
      const auto& seg = g.segments[k / 2];
      const std::size_t v = g.arcs[k].dst;
      const double t_v = t_u + seg.length_km / t.speed(seg.road_class);
      if (t_v < time[v]) {
        time[v] = t_v;
        emission[v] = emission[u] + seg.length_km * t.factor(seg.road_class);
        queue.emplace(t_v, v);
      }
    }
  }
  return emission;
}

std::size_t center_node(const graph::RoadGraph& g, std::span<const std::size_t> members) {
  if (members.empty()) throw std::invalid_argument("center_node: no members");
  double cx = 0.0;
  double cy = 0.0;
  for (std::size_t i : members) {
    cx += g.intersections[i].rel_lon;
    cy += g.intersections[i].rel_lat;
  }
  cx /= static_cast<double>(members.size());
  cy /= static_cast<double>(members.size());
  std::size_t best = members.front();
  double best_d = kInf;
  for (std::size_t i : members) {
    const auto& p = g.intersections[i];
    const double d = std::hypot(p.rel_lon - cx, p.rel_lat - cy);
    if (d < best_d || (d == best_d && p.id < g.intersections[best].id)) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

std::vector<std::size_t> gateway_nodes(const graph::RoadGraph& g) {
  const std::size_t n = g.node_count();
  if (n == 0) return {};
  auto pick = [&](auto key, bool largest) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      const double a = key(g.intersections[i]);
      const double b = key(g.intersections[best]);
      const bool better = largest ? a > b : a < b;
      if (better || (a == b && g.intersections[i].id < g.intersections[best].id)) best = i;
    }
    return best;
  };
  auto lon = [](const graph::Intersection& p) { return p.rel_lon; };
  auto lat = [](const graph::Intersection& p) { return p.rel_lat; };
  std::vector<std::size_t> out{pick(lon, false), pick(lon, true), pick(lat, false), pick(lat, true)};
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

OracleResult oracle_emission(std::span<const graph::RoadGraph> regions, const graph::Hierarchy& hierarchy,
                             std::span<const ODFlow> od, const OracleOptions& options) {
  OracleResult result;
  std::map<std::int64_t, std::size_t> region_pos;
  std::vector<Router> routers;
  routers.reserve(regions.size());
  for (std::size_t r = 0; r < regions.size(); ++r) {
    region_pos[regions[r].region_id] = r;
    routers.push_back({regions[r], options.classes, result.warnings, {}, 0.0});
    result.emission[regions[r].region_id] = 0.0;
  }

  // Community centers, keyed by community id.
  std::map<std::int64_t, std::size_t> center;
  for (const auto& g : regions) {
    std::map<std::int64_t, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      members[hierarchy.node_to_community.at(g.intersections[i].id)].push_back(i);
    }
    for (const auto& [c, list] : members) center[c] = center_node(g, list);
  }

  std::map<std::int64_t, double> access;
  auto region_access = [&](std::int64_t region) {
    auto it = access.find(region);
    if (it != access.end()) return it->second;
    const std::size_t r = region_pos.at(region);
    const auto& g = regions[r];
    std::vector<std::size_t> all(g.node_count());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const std::size_t hub = center_node(g, all);
    const auto gates = gateway_nodes(g);
    double total = 0.0;
    for (std::size_t gate : gates) total += routers[r].emission(hub, gate);
    const double value = total / static_cast<double>(gates.size());
    access.emplace(region, value);
    return value;
  };

  const double trunk = options.trunk_km * options.classes.factor(graph::RoadClass::motorway);
  for (const auto& f : od) {
    if (!(f.flow > 0.0)) continue;
    if (f.level == graph::Level::community) {
      const std::int64_t ro = hierarchy.community_to_region.at(f.origin);
      const std::int64_t rd = hierarchy.community_to_region.at(f.dest);
      if (ro != rd) {
        result.warnings.push_back("community OD " + std::to_string(f.origin) + "->" + std::to_string(f.dest) +
                                  " crosses regions; ignored");
        continue;
      }
      const std::size_t r = region_pos.at(ro);
      result.emission[ro] += f.flow * routers[r].emission(center.at(f.origin), center.at(f.dest));
    } else {
      const double per_trip = region_access(f.origin) + trunk + region_access(f.dest);
      result.emission[f.origin] += 0.5 * f.flow * per_trip;
      result.emission[f.dest] += 0.5 * f.flow * per_trip;
    }
  }
  return result;
}

}  // namespace hence::data
