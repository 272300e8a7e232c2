#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hence/graph/hetero_graph.hpp"
#include "hence/graph/hierarchy.hpp"
#include "hence/graph/road_graph.hpp"

namespace hence::data {

/// Trips per period between two areas of the same level.
struct ODFlow {
  graph::Level level{graph::Level::community};
  std::int64_t origin{0};
  std::int64_t dest{0};
  double flow{0.0};

  friend bool operator==(const ODFlow&, const ODFlow&) = default;
};

/// Everything the model consumes: road networks per region, the affiliation
/// hierarchy, OD flows at both levels, region adjacency and emission labels
/// (raw units, metric tons CO2 per year).
struct Dataset {
  std::vector<graph::RoadGraph> regions;  // ascending region id
  graph::Hierarchy hierarchy;
  std::vector<ODFlow> od;
  std::vector<std::pair<std::int64_t, std::int64_t>> region_adjacency;
  /// Segments whose endpoints lie in different regions; they feed the
  /// region-level spatial link features.
  std::vector<graph::Segment> cross_region_segments;
  std::map<std::int64_t, double> labels;

  [[nodiscard]] std::vector<std::int64_t> region_ids() const;
  [[nodiscard]] std::vector<std::int64_t> labeled_region_ids() const;
  [[nodiscard]] std::size_t region_index(std::int64_t region_id) const;
  [[nodiscard]] const graph::RoadGraph& region(std::int64_t region_id) const;

  /// Checks referential integrity; throws ValidationError with every issue.
  void validate() const;
};

bool operator==(const Dataset& a, const Dataset& b);

struct LoadResult {
  Dataset dataset;
  std::vector<std::string> warnings;
};

/// Reads nodes.csv, edges.csv, od.csv, labels.csv and region_adjacency.csv
/// from `dir`. Throws ValidationError collecting all problems found.
LoadResult load_dataset(const std::filesystem::path& dir);

/// Writes the five CSV files; doubles use shortest round-trip formatting.
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);

}  // namespace hence::data
