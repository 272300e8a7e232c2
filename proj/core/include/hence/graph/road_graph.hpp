#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hence::graph {

enum class RoadClass : std::uint8_t { motorway, primary, secondary, residential, other };
inline constexpr std::size_t kRoadClassCount = 5;
inline constexpr std::array<RoadClass, kRoadClassCount> kAllRoadClasses = {
    RoadClass::motorway, RoadClass::primary, RoadClass::secondary, RoadClass::residential,
    RoadClass::other};

/// Unknown names map to RoadClass::other.
RoadClass parse_road_class(std::string_view name);
std::string_view road_class_name(RoadClass c);

struct Intersection {
  std::int64_t id{0};
  double rel_lon{0.0};
  double rel_lat{0.0};
};

struct Segment {
  std::int64_t u{0};
  std::int64_t v{0};
  double rel_lon{0.0};
  double rel_lat{0.0};
  double length_km{0.0};
  RoadClass road_class{RoadClass::other};
};

/// Directed arc between local node indices; messages flow src -> dst.
struct Arc {
  std::size_t src{0};
  std::size_t dst{0};
  friend bool operator==(const Arc&, const Arc&) = default;
};

/// Road network of one region. Each segment k is realized as arcs 2k (u->v)
/// and 2k+1 (v->u).
struct RoadGraph {
  static constexpr std::size_t kNodeFeatures = 3;                     // rel_lon, rel_lat, degree
  static constexpr std::size_t kEdgeFeatures = 3 + kRoadClassCount;  // rel_lon, rel_lat, length, class

  std::int64_t region_id{0};
  std::vector<Intersection> intersections;
  std::vector<Segment> segments;
  std::vector<Arc> arcs;
  std::vector<std::size_t> degree;
  std::unordered_map<std::int64_t, std::size_t> index;

  [[nodiscard]] std::size_t node_count() const { return intersections.size(); }
  [[nodiscard]] std::size_t index_of(std::int64_t node_id) const;
  /// Row-major node_count x kNodeFeatures.
  [[nodiscard]] std::vector<double> node_features() const;
  /// Row-major arcs.size() x kEdgeFeatures; both arcs of a segment share a row value.
  [[nodiscard]] std::vector<double> arc_features() const;
};

/// Validates and indexes a road network. Throws ValidationError listing every
/// dangling endpoint, duplicate id, self-loop, out-of-range coordinate and
/// non-positive length.
RoadGraph build_road_graph(std::int64_t region_id, std::vector<Intersection> intersections,
                           std::vector<Segment> segments);

/// Raw (un-normalized) feature row for one segment.
std::array<double, RoadGraph::kEdgeFeatures> segment_features(const Segment& s);

[[nodiscard]] bool is_connected(const RoadGraph& g);

}  // namespace hence::graph
