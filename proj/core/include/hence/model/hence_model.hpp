#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "hence/autodiff/parameter.hpp"
#include "hence/egat/egat_layer.hpp"
#include "hence/egat/fusion.hpp"
#include "hence/egat/hetero_layer.hpp"
#include "hence/model/config.hpp"
#include "hence/model/prepared.hpp"
#include "hence/model/region_cache.hpp"

namespace hence::model {

/// Fusion weights observed while predicting one region. Pairs are
/// (spatial, od) for the hetero levels and (intra, inter) for the final
/// fusion; the hetero pairs come from the last layer, and the community pair
/// is averaged over the region's communities. NaN marks an absent level.
struct AttentionTrace {
  static constexpr double kNone = std::numeric_limits<double>::quiet_NaN();
  std::int64_t region_id{0};
  std::array<double, 2> community_beta{kNone, kNone};
  std::array<double, 2> region_beta{kNone, kNone};
  std::array<double, 2> scale_beta{kNone, kNone};
};

/// Linear embedding of the scalar OD feature: x W + b.
struct FlowEmbedding {
  ad::Tensor W;  // 1 x d
  ad::Tensor b;  // 1 x d
};

struct MlpHead {
  ad::Tensor W1;  // d x d/2
  ad::Tensor b1;
  ad::Tensor W2;  // d/2 x 1
  ad::Tensor b2;
};

class HenceModel {
 public:
  explicit HenceModel(ModelConfig config);

  [[nodiscard]] const ModelConfig& config() const { return config_; }
  [[nodiscard]] ad::ParameterSet& parameters() { return params_; }
  [[nodiscard]] const ad::ParameterSet& parameters() const { return params_; }

  /// Switches the variant and re-initializes the parameters. Throws
  /// std::logic_error once the model has been trained.
  void set_ablation(Ablation variant);
  void mark_trained() { trained_ = true; }
  [[nodiscard]] bool trained() const { return trained_; }

  struct RoadOutput {
    ad::Tensor nodes;
    ad::Tensor edges;
  };
  [[nodiscard]] RoadOutput road_level(const PreparedRegion& region) const;

  /// 1 x d region vector pooled from the community-level graph (or straight
  /// from the road level when the community level is ablated).
  [[nodiscard]] ad::Tensor intra_region_representation(const PreparedData& data, std::size_t region,
                                                       AttentionTrace* trace = nullptr) const;

  /// Target row of the region-level graph whose other rows come from the
  /// cache. `prune` restricts the computation to the target's receptive field.
  [[nodiscard]] ad::Tensor inter_region_representation(const PreparedData& data, std::size_t region,
                                                       const ad::Tensor& live_intra, const RegionCache& cache,
                                                       AttentionTrace* trace = nullptr, bool prune = true) const;

  /// Normalized-space prediction, 1 x 1. The cache may be null only when the
  /// region level is ablated.
  [[nodiscard]] ad::Tensor predict_region(const PreparedData& data, std::size_t region, const RegionCache* cache,
                                          AttentionTrace* trace = nullptr) const;

  /// Predictions for several regions stacked into a column.
  [[nodiscard]] ad::Tensor predict(const PreparedData& data, std::span<const std::size_t> regions,
                                   const RegionCache* cache) const;

  [[nodiscard]] ad::Tensor head(const ad::Tensor& v) const;

 private:
  void build();
  void check_compatible(const PreparedData& data) const;
  [[nodiscard]] ad::Tensor embed(const FlowEmbedding& e, const ad::Tensor& normalized_flow) const;

  ModelConfig config_;
  ad::ParameterSet params_;
  bool trained_{false};

  std::vector<egat::EgatParams> road_;
  std::vector<egat::HeteroLayerParams> community_;
  std::vector<egat::HeteroLayerParams> region_;
  std::optional<FlowEmbedding> community_od_embed_;
  std::optional<FlowEmbedding> region_od_embed_;
  std::optional<egat::FusionParams> final_fusion_;
  MlpHead head_;
};

}  // namespace hence::model
