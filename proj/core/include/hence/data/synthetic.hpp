#pragma once

#include <cstdint>
#include <filesystem>

#include "hence/data/dataset.hpp"
#include "hence/data/oracle.hpp"

namespace hence::data {

/// Knobs of the synthetic city. Regions sit on a square grid; each region is
/// a jittered grid road network split into rectangular community blocks.
struct SynthParams {
  std::size_t n_regions{8};
  std::size_t grid_side{6};
  std::size_t communities_per_region{4};
  double gravity_exponent{2.0};
  RoadClassTable classes;
  double noise_std{0.1};
  std::uint64_t seed{1};

  double edge_drop_prob{0.2};
  double node_spacing_km{0.6};
  double region_spacing_km{8.0};
  /// Regions exchange OD flows when within this many grid steps (Chebyshev).
  std::size_t inter_od_radius{1};
  double intra_flow_scale{100.0};
  double inter_flow_scale{100.0};
  double trunk_km{5.0};
  /// Lognormal spread of the per-region street spacing.
  double spacing_sigma{0.35};
  /// Lognormal spread of the street gaps of each block column and block row,
  /// so communities of one region differ in density.
  double block_spacing_sigma{0.3};
  /// Population follows intersection density (intersections per km^2,
  /// relative to node_spacing_km) raised to this power.
  double density_exponent{1.0};
  /// Residual lognormal spread of community populations.
  double population_sigma{0.3};
  /// Lognormal spread of the per-region trip propensities.
  double propensity_sigma{0.4};

  /// Throws std::invalid_argument on out-of-domain values.
  void validate() const;
};

/// Builds a complete labeled Dataset. Labels are the routing oracle's value
/// times exp(noise_std * N(0,1)). Throws std::runtime_error when a connected
/// road network cannot be drawn within 10 attempts.
Dataset generate_synthetic(const SynthParams& p);

/// Community blocks (columns, rows) used for `communities` per region.
std::pair<std::size_t, std::size_t> community_blocks(std::size_t communities);

}  // namespace hence::data
