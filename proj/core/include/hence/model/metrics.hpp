#pragma once

#include <span>

namespace hence::model {

struct Metrics {
  double r2{0.0};
  double mae{0.0};
  double rmse{0.0};
};

/// R^2 = 1 - SS_res / SS_tot, MAE and RMSE. A constant target makes R^2
/// undefined: it is returned as NaN and a warning is logged. Throws
/// std::invalid_argument on empty or mismatched inputs.
Metrics compute_metrics(std::span<const double> target, std::span<const double> prediction);

}  // namespace hence::model
