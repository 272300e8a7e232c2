#include "hence/model/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace hence::model {

Metrics compute_metrics(std::span<const double> target, std::span<const double> prediction) {
  if (target.size() != prediction.size()) throw std::invalid_argument("metrics: size mismatch");
  if (target.empty()) throw std::invalid_argument("metrics: empty split");
  const double n = static_cast<double>(target.size());
  double mean = 0.0;
  for (double y : target) mean += y;
  mean /= n;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  double abs_err = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double e = target[i] - prediction[i];
    ss_res += e * e;
    abs_err += std::abs(e);
    ss_tot += (target[i] - mean) * (target[i] - mean);
  }
  Metrics m;
  m.mae = abs_err / n;
  m.rmse = std::sqrt(ss_res / n);
  if (ss_tot == 0.0) {
    spdlog::warn("metrics: constant target, R^2 is undefined");
    m.r2 = std::numeric_limits<double>::quiet_NaN();
  } else {
    m.r2 = 1.0 - ss_res / ss_tot;
  }
  return m;
}

}  // namespace hence::model
