#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hence/data/dataset.hpp"

namespace hence::data {

/// Per-class travel speed (km/h) and emission factor (kg CO2 per km),
/// indexed by RoadClass. Synthetic-world conventions.
struct RoadClassTable {
  std::array<double, graph::kRoadClassCount> speed_kmh{100.0, 70.0, 50.0, 30.0, 40.0};
  std::array<double, graph::kRoadClassCount> emission_kg_per_km{0.15, 0.2, 0.25, 0.3, 0.28};

  [[nodiscard]] double speed(graph::RoadClass c) const { return speed_kmh[static_cast<std::size_t>(c)]; }
  [[nodiscard]] double factor(graph::RoadClass c) const {
    return emission_kg_per_km[static_cast<std::size_t>(c)];
  }
  [[nodiscard]] double worst_factor() const;
};

struct OracleOptions {
  RoadClassTable classes;
  /// Motorway distance charged between two regions on top of the access legs.
  double trunk_km{5.0};
};

/// Emission of the fastest (travel-time) route from `source` to every node,
/// in local indices. Unreachable nodes get +infinity.
std::vector<double> route_emissions(const graph::RoadGraph& g, std::size_t source, const RoadClassTable& t);

/// Node nearest the mean position of `members` (ties go to the smaller id).
std::size_t center_node(const graph::RoadGraph& g, std::span<const std::size_t> members);

/// Nodes with the smallest/largest rel_lon and rel_lat, deduplicated.
std::vector<std::size_t> gateway_nodes(const graph::RoadGraph& g);

struct OracleResult {
  std::map<std::int64_t, double> emission;  // every region, zero without traffic
  std::vector<std::string> warnings;
};

/// Routing-based emission per region.
///  - community OD a->b inside a region: flow x route emission between the
///    two community centers, charged to that region;
///  - region OD r->s: flow x (access(r) + trunk_km x motorway factor +
///    access(s)), half to r and half to s, where access is the mean route
///    emission from the region center to its gateways.
/// Unreachable pairs fall back to straight-line distance times the worst
/// class factor, with a warning.
OracleResult oracle_emission(std::span<const graph::RoadGraph> regions, const graph::Hierarchy& hierarchy,
                             std::span<const ODFlow> od, const OracleOptions& options = {});

}  // namespace hence::data
