#pragma once

#include <cstdint>
#include <string_view>

#include "hence/autodiff/ops.hpp"
#include "hence/graph/pooling.hpp"

namespace hence::model {

enum class Ablation { none, no_spatial_link, no_od_link, no_community_level, no_region_level };

/// Throws std::invalid_argument on an unknown variant name.
Ablation parse_ablation(std::string_view name);
std::string_view ablation_name(Ablation a);

/// Architecture settings; everything that determines the parameter set.
struct ModelConfig {
  std::size_t hidden{64};
  std::size_t layers{3};       // community and region hetero stacks
  std::size_t road_layers{3};  // road-level EGAT stack
  graph::Pooling pooling{graph::Pooling::mean};
  Ablation ablation{Ablation::none};
  double slope{ad::kLeakySlope};
  double min_flow{0.0};
  std::uint64_t seed{42};

  /// Throws std::invalid_argument when a value is out of its domain.
  void validate() const;

  [[nodiscard]] bool spatial_links() const { return ablation != Ablation::no_spatial_link; }
  [[nodiscard]] bool od_links() const { return ablation != Ablation::no_od_link; }
  [[nodiscard]] bool community_level() const { return ablation != Ablation::no_community_level; }
  [[nodiscard]] bool region_level() const { return ablation != Ablation::no_region_level; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace hence::model
