#include "hence/data/dataset.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "csv.hpp"
#include "hence/error.hpp"

namespace hence::data {
namespace {

const std::vector<std::string> kNodesHeader{"region_id", "community_id", "node_id", "rel_lon", "rel_lat"};
const std::vector<std::string> kEdgesHeader{"node_u",  "node_v",    "rel_lon",
                                            "rel_lat", "length_km", "road_class"};
const std::vector<std::string> kOdHeader{"level", "origin_id", "dest_id", "flow"};
const std::vector<std::string> kLabelsHeader{"region_id", "emission_tco2"};
const std::vector<std::string> kAdjacencyHeader{"region_a", "region_b"};

bool same_intersection(const graph::Intersection& a, const graph::Intersection& b) {
  return a.id == b.id && a.rel_lon == b.rel_lon && a.rel_lat == b.rel_lat;
}

bool same_segment(const graph::Segment& a, const graph::Segment& b) {
  return a.u == b.u && a.v == b.v && a.rel_lon == b.rel_lon && a.rel_lat == b.rel_lat &&
         a.length_km == b.length_km && a.road_class == b.road_class;
}

template <typename T, typename Eq>
bool same_range(const std::vector<T>& a, const std::vector<T>& b, Eq eq) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), eq);
}

/// Parses one numeric field, recording an issue on failure.
template <typename T>
std::optional<T> field(const csv::Table& t, const csv::Row& r, std::size_t i,
                       const std::vector<std::string>& header, std::vector<std::string>& issues) {
  auto v = csv::parse_number<T>(r.fields[i]);
  if (!v) issues.push_back(csv::where(t, r) + "malformed " + header[i] + " '" + r.fields[i] + "'");
  return v;
}

std::optional<graph::Level> parse_level(std::string_view s) {
  if (s == "community") return graph::Level::community;
  if (s == "region") return graph::Level::region;
  return std::nullopt;
}

}  // namespace

std::vector<std::int64_t> Dataset::region_ids() const {
  std::vector<std::int64_t> out;
  out.reserve(regions.size());
  for (const auto& g : regions) out.push_back(g.region_id);
  return out;
}

std::vector<std::int64_t> Dataset::labeled_region_ids() const {
  std::vector<std::int64_t> out;
  for (const auto& g : regions)
    if (labels.count(g.region_id)) out.push_back(g.region_id);
  return out;
}

std::size_t Dataset::region_index(std::int64_t region_id) const {
  const auto it = std::lower_bound(regions.begin(), regions.end(), region_id,
                                   [](const graph::RoadGraph& g, std::int64_t id) { return g.region_id < id; });
  if (it == regions.end() || it->region_id != region_id) {
    throw std::out_of_range("unknown region " + std::to_string(region_id));
  }
  return static_cast<std::size_t>(it - regions.begin());
}

const graph::RoadGraph& Dataset::region(std::int64_t region_id) const {
  return regions[region_index(region_id)];
}

void Dataset::validate() const {
  std::vector<std::string> issues;
  try {
    hierarchy.validate();
  } catch (const ValidationError& e) {
    issues.insert(issues.end(), e.issues().begin(), e.issues().end());
  }
  std::set<std::int64_t> known;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& g = regions[i];
    known.insert(g.region_id);
    if (i > 0 && regions[i - 1].region_id >= g.region_id) {
      issues.push_back("regions not in ascending id order");
    }
    if (g.node_count() == 0) issues.push_back("region " + std::to_string(g.region_id) + " has no intersections");
    for (const auto& n : g.intersections) {
      const auto it = hierarchy.node_to_community.find(n.id);
      if (it == hierarchy.node_to_community.end() ||
          hierarchy.community_to_region.at(it->second) != g.region_id) {
        issues.push_back("node " + std::to_string(n.id) + " not affiliated with region " +
                         std::to_string(g.region_id));
      }
    }
  }
  for (const auto& [region, label] : labels) {
    if (!known.count(region)) issues.push_back("label for region " + std::to_string(region) + " without road graph");
    if (!(label > 0.0)) issues.push_back("label for region " + std::to_string(region) + " is not positive");
  }
  for (const auto& f : od) {
    const bool community = f.level == graph::Level::community;
    for (std::int64_t id : {f.origin, f.dest}) {
      const bool ok = community ? hierarchy.has_community(id) : known.count(id) > 0;
      if (!ok) {
        issues.push_back(std::string("OD endpoint ") + std::to_string(id) + " unknown at " +
                         std::string(graph::level_name(f.level)) + " level");
      }
    }
    if (!(f.flow >= 0.0)) issues.push_back("negative OD flow");
  }
  for (const auto& [a, b] : region_adjacency) {
    if (!known.count(a) || !known.count(b)) {
      issues.push_back("adjacency " + std::to_string(a) + "-" + std::to_string(b) + " references unknown region");
    }
  }
  if (!issues.empty()) throw ValidationError("dataset invariants violated:", std::move(issues));
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.regions.size() != b.regions.size()) return false;
  for (std::size_t i = 0; i < a.regions.size(); ++i) {
    const auto& ga = a.regions[i];
    const auto& gb = b.regions[i];
    if (ga.region_id != gb.region_id || !same_range(ga.intersections, gb.intersections, same_intersection) ||
        !same_range(ga.segments, gb.segments, same_segment)) {
      return false;
    }
  }
  return a.hierarchy.node_to_community == b.hierarchy.node_to_community &&
         a.hierarchy.community_to_region == b.hierarchy.community_to_region && a.od == b.od &&
         a.region_adjacency == b.region_adjacency &&
         same_range(a.cross_region_segments, b.cross_region_segments, same_segment) &&
         a.labels == b.labels;
}

LoadResult load_dataset(const std::filesystem::path& dir) {
  std::vector<std::string> issues;
  LoadResult result;
  auto& warnings = result.warnings;
  Dataset& ds = result.dataset;

  const auto nodes = csv::read(dir / "nodes.csv", kNodesHeader, issues);
  const auto edges = csv::read(dir / "edges.csv", kEdgesHeader, issues);
  const auto od = csv::read(dir / "od.csv", kOdHeader, issues);
  const auto labels = csv::read(dir / "labels.csv", kLabelsHeader, issues);
  const auto adjacency = csv::read(dir / "region_adjacency.csv", kAdjacencyHeader, issues);

  std::map<std::int64_t, std::vector<graph::Intersection>> region_nodes;
  std::map<std::int64_t, std::vector<graph::Segment>> region_segments;
  if (nodes) {
    for (const auto& row : nodes->rows) {
      const auto region = field<std::int64_t>(*nodes, row, 0, kNodesHeader, issues);
      const auto community = field<std::int64_t>(*nodes, row, 1, kNodesHeader, issues);
      const auto node = field<std::int64_t>(*nodes, row, 2, kNodesHeader, issues);
      const auto lon = field<double>(*nodes, row, 3, kNodesHeader, issues);
      const auto lat = field<double>(*nodes, row, 4, kNodesHeader, issues);
      if (!region || !community || !node || !lon || !lat) continue;
      if (!ds.hierarchy.node_to_community.emplace(*node, *community).second) {
        issues.push_back(csv::where(*nodes, row) + "duplicate node id " + std::to_string(*node));
        continue;
      }
      const auto [it, fresh] = ds.hierarchy.community_to_region.emplace(*community, *region);
      if (!fresh && it->second != *region) {
        issues.push_back(csv::where(*nodes, row) + "community " + std::to_string(*community) +
                         " assigned to regions " + std::to_string(it->second) + " and " +
                         std::to_string(*region));
        continue;
      }
      region_nodes[*region].push_back({*node, *lon, *lat});
    }
  }

  if (edges) {
    for (const auto& row : edges->rows) {
      const auto u = field<std::int64_t>(*edges, row, 0, kEdgesHeader, issues);
      const auto v = field<std::int64_t>(*edges, row, 1, kEdgesHeader, issues);
      const auto lon = field<double>(*edges, row, 2, kEdgesHeader, issues);
      const auto lat = field<double>(*edges, row, 3, kEdgesHeader, issues);
      const auto len = field<double>(*edges, row, 4, kEdgesHeader, issues);
      if (!u || !v || !lon || !lat || !len) continue;
      const auto road_class = graph::parse_road_class(row.fields[5]);
      if (road_class == graph::RoadClass::other && row.fields[5] != "other") {
        warnings.push_back(csv::where(*edges, row) + "unknown road class '" + row.fields[5] +
                           "' mapped to other");
      }
      bool dangling = false;
      for (std::int64_t id : {*u, *v}) {
        if (!ds.hierarchy.node_to_community.count(id)) {
          issues.push_back(csv::where(*edges, row) + "segment references missing node " + std::to_string(id));
          dangling = true;
        }
      }
      if (!(*len > 0.0)) {
        issues.push_back(csv::where(*edges, row) + "non-positive length_km");
        continue;
      }
      if (dangling) continue;
      const graph::Segment seg{*u, *v, *lon, *lat, *len, road_class};
      const std::int64_t ru = ds.hierarchy.region_of_node(*u);
      const std::int64_t rv = ds.hierarchy.region_of_node(*v);
      if (ru == rv) {
        region_segments[ru].push_back(seg);
      } else {
        ds.cross_region_segments.push_back(seg);
      }
    }
  }

  for (auto& [region, list] : region_nodes) {
    try {
      ds.regions.push_back(graph::build_road_graph(region, std::move(list), std::move(region_segments[region])));
    } catch (const ValidationError& e) {
      issues.insert(issues.end(), e.issues().begin(), e.issues().end());
    }
  }
  std::set<std::int64_t> known_regions;
  for (const auto& [c, r] : ds.hierarchy.community_to_region) known_regions.insert(r);

  if (od) {
    std::set<std::tuple<int, std::int64_t, std::int64_t>> seen;
    for (const auto& row : od->rows) {
      const auto level = parse_level(row.fields[0]);
      if (!level) {
        issues.push_back(csv::where(*od, row) + "level must be community or region, got '" + row.fields[0] + "'");
        continue;
      }
      const auto o = field<std::int64_t>(*od, row, 1, kOdHeader, issues);
      const auto d = field<std::int64_t>(*od, row, 2, kOdHeader, issues);
      const auto flow = field<double>(*od, row, 3, kOdHeader, issues);
      if (!o || !d || !flow) continue;
      bool bad = false;
      for (std::int64_t id : {*o, *d}) {
        const bool ok = *level == graph::Level::community ? ds.hierarchy.has_community(id)
                                                           : known_regions.count(id) > 0;
        if (!ok) {
          issues.push_back(csv::where(*od, row) + "unknown " + std::string(graph::level_name(*level)) +
                           " " + std::to_string(id));
          bad = true;
        }
      }
      if (!(*flow >= 0.0) || !std::isfinite(*flow)) {
        issues.push_back(csv::where(*od, row) + "flow must be a non-negative number");
        bad = true;
      }
      if (*o == *d) {
        issues.push_back(csv::where(*od, row) + "origin equals destination");
        bad = true;
      }
      if (!seen.emplace(static_cast<int>(*level), *o, *d).second) {
        issues.push_back(csv::where(*od, row) + "duplicate OD pair");
        bad = true;
      }
      if (bad) continue;
      if (*level == graph::Level::community &&
          ds.hierarchy.community_to_region.at(*o) != ds.hierarchy.community_to_region.at(*d)) {
        warnings.push_back(csv::where(*od, row) + "community OD crosses regions; not used by community graphs");
      }
      ds.od.push_back({*level, *o, *d, *flow});
    }
  }

  if (labels) {
    for (const auto& row : labels->rows) {
      const auto region = field<std::int64_t>(*labels, row, 0, kLabelsHeader, issues);
      const auto value = field<double>(*labels, row, 1, kLabelsHeader, issues);
      if (!region || !value) continue;
      if (!known_regions.count(*region)) {
        issues.push_back(csv::where(*labels, row) + "label for unknown region " + std::to_string(*region));
      } else if (!(*value > 0.0) || !std::isfinite(*value)) {
        issues.push_back(csv::where(*labels, row) + "emission must be positive");
      } else if (!ds.labels.emplace(*region, *value).second) {
        issues.push_back(csv::where(*labels, row) + "duplicate label for region " + std::to_string(*region));
      }
    }
  }

  if (adjacency) {
    std::set<std::pair<std::int64_t, std::int64_t>> seen;
    for (const auto& row : adjacency->rows) {
      const auto a = field<std::int64_t>(*adjacency, row, 0, kAdjacencyHeader, issues);
      const auto b = field<std::int64_t>(*adjacency, row, 1, kAdjacencyHeader, issues);
      if (!a || !b) continue;
      if (!known_regions.count(*a) || !known_regions.count(*b)) {
        issues.push_back(csv::where(*adjacency, row) + "adjacency references unknown region");
        continue;
      }
      if (*a == *b) {
        issues.push_back(csv::where(*adjacency, row) + "region adjacent to itself");
        continue;
      }
      if (!seen.insert(std::minmax(*a, *b)).second) {
        warnings.push_back(csv::where(*adjacency, row) + "duplicate adjacency ignored");
        continue;
      }
      ds.region_adjacency.emplace_back(*a, *b);
    }
  }

  if (!issues.empty()) {
    throw ValidationError("dataset " + dir.string() + " failed validation:", std::move(issues));
  }
  for (const auto& g : ds.regions) {
    if (!ds.labels.count(g.region_id)) warnings.push_back("region " + std::to_string(g.region_id) + " has no label");
  }
  ds.validate();
  return result;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name, const std::vector<std::string>& header) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    std::string line;
    for (const auto& h : header) line += (line.empty() ? "" : ",") + h;
    out << line << '\n';
    return out;
  };

  {
    auto out = open("nodes.csv", kNodesHeader);
    for (const auto& g : ds.regions)
      for (const auto& n : g.intersections)
        out << fmt::format("{},{},{},{},{}\n", g.region_id, ds.hierarchy.node_to_community.at(n.id), n.id,
                           n.rel_lon, n.rel_lat);
  }
  {
    auto out = open("edges.csv", kEdgesHeader);
    auto write_seg = [&](const graph::Segment& s) {
      out << fmt::format("{},{},{},{},{},{}\n", s.u, s.v, s.rel_lon, s.rel_lat, s.length_km,
                         graph::road_class_name(s.road_class));
    };
    for (const auto& g : ds.regions)
      for (const auto& s : g.segments) write_seg(s);
    for (const auto& s : ds.cross_region_segments) write_seg(s);
  }
  {
    auto out = open("od.csv", kOdHeader);
    for (const auto& f : ds.od)
      out << fmt::format("{},{},{},{}\n", graph::level_name(f.level), f.origin, f.dest, f.flow);
  }
  {
    auto out = open("labels.csv", kLabelsHeader);
    for (const auto& [region, value] : ds.labels) out << fmt::format("{},{}\n", region, value);
  }
  {
    auto out = open("region_adjacency.csv", kAdjacencyHeader);
    for (const auto& [a, b] : ds.region_adjacency) out << fmt::format("{},{}\n", a, b);
  }
}

}  // namespace hence::data
