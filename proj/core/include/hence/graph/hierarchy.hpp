#pragma once

#include <cstdint>
#include <map>
#include <vector>

namespace hence::graph {

/// Affiliation maps intersection -> community -> region.
struct Hierarchy {
  std::map<std::int64_t, std::int64_t> node_to_community;
  std::map<std::int64_t, std::int64_t> community_to_region;

  [[nodiscard]] std::vector<std::int64_t> regions() const;
  [[nodiscard]] std::vector<std::int64_t> communities_of(std::int64_t region) const;
  [[nodiscard]] std::int64_t region_of_node(std::int64_t node) const;
  [[nodiscard]] bool has_community(std::int64_t c) const { return community_to_region.count(c) > 0; }

  /// Throws ValidationError if a node maps to an unknown community or a
  /// community has no member nodes.
  void validate() const;
};

}  // namespace hence::graph
