#include "hence/graph/hierarchy.hpp"

#include <set>
#include <stdexcept>
#include <string>

#include "hence/error.hpp"

namespace hence::graph {

std::vector<std::int64_t> Hierarchy::regions() const {
  std::set<std::int64_t> out;
  for (const auto& [c, r] : community_to_region) out.insert(r);
  return {out.begin(), out.end()};
}

std::vector<std::int64_t> Hierarchy::communities_of(std::int64_t region) const {
  std::vector<std::int64_t> out;
  for (const auto& [c, r] : community_to_region)
    if (r == region) out.push_back(c);
  return out;
}

std::int64_t Hierarchy::region_of_node(std::int64_t node) const {
  const auto it = node_to_community.find(node);
  if (it == node_to_community.end()) throw std::out_of_range("unknown node " + std::to_string(node));
  return community_to_region.at(it->second);
}

void Hierarchy::validate() const {
  std::vector<std::string> issues;
  std::set<std::int64_t> populated;
  for (const auto& [node, c] : node_to_community) {
    if (!community_to_region.count(c)) {
      issues.push_back("node " + std::to_string(node) + " maps to unknown community " +
                       std::to_string(c));
    }
    populated.insert(c);
  }
  for (const auto& [c, r] : community_to_region) {
    if (!populated.count(c)) issues.push_back("community " + std::to_string(c) + " has no nodes");
  }
  if (!issues.empty()) throw ValidationError("invalid hierarchy:", std::move(issues));
}

}  // namespace hence::graph
