#include "hence/model/config.hpp"

#include <stdexcept>
#include <string>

namespace hence::model {

Ablation parse_ablation(std::string_view name) {
  if (name == "none") return Ablation::none;
  if (name == "no_spatial_link") return Ablation::no_spatial_link;
  if (name == "no_od_link") return Ablation::no_od_link;
  if (name == "no_community_level") return Ablation::no_community_level;
  if (name == "no_region_level") return Ablation::no_region_level;
  throw std::invalid_argument("unknown ablation variant '" + std::string(name) +
                              "' (expected none, no_spatial_link, no_od_link, no_community_level, "
                              "no_region_level)");
}

std::string_view ablation_name(Ablation a) {
  switch (a) {
    case Ablation::none: return "none";
    case Ablation::no_spatial_link: return "no_spatial_link";
    case Ablation::no_od_link: return "no_od_link";
    case Ablation::no_community_level: return "no_community_level";
    case Ablation::no_region_level: return "no_region_level";
  }
  return "none";
}

void ModelConfig::validate() const {
  if (hidden < 2) throw std::invalid_argument("hidden must be at least 2");
  if (layers < 1) throw std::invalid_argument("layers must be at least 1");
  if (road_layers < 1) throw std::invalid_argument("road_layers must be at least 1");
  if (!(slope >= 0.0 && slope < 1.0)) throw std::invalid_argument("slope must lie in [0, 1)");
  if (!(min_flow >= 0.0)) throw std::invalid_argument("min_flow must be non-negative");
}

}  // namespace hence::model
