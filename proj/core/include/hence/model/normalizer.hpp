#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hence/data/dataset.hpp"

namespace hence::model {

/// Per-column mean and standard deviation. Columns with zero spread keep a
/// unit scale so constant inputs map to zero.
struct ZScore {
  std::vector<double> mean;
  std::vector<double> std;

  static ZScore fit(std::span<const double> rows, std::size_t cols);
  void apply(std::span<double> rows) const;
  [[nodiscard]] double forward(double v, std::size_t col = 0) const { return (v - mean[col]) / std[col]; }
  [[nodiscard]] double inverse(double z, std::size_t col = 0) const { return z * std[col] + mean[col]; }

  friend bool operator==(const ZScore&, const ZScore&) = default;
};

/// Input and label statistics, fitted on the training regions only.
/// Flows and labels are log1p-transformed before standardization.
struct Normalizer {
  ZScore node;            // intersection features
  ZScore edge;            // segment features
  ZScore community_flow;  // log1p(flow) of community OD records
  ZScore region_flow;     // log1p(flow) of region OD records
  ZScore label;           // log1p(emission)

  static Normalizer fit(const data::Dataset& ds, std::span<const std::int64_t> train_regions);

  [[nodiscard]] double label_forward(double raw) const;
  [[nodiscard]] double label_inverse(double normalized) const;

  friend bool operator==(const Normalizer&, const Normalizer&) = default;
};

}  // namespace hence::model
