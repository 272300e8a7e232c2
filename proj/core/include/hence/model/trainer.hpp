#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "hence/model/hence_model.hpp"
#include "hence/model/metrics.hpp"
#include "hence/model/prepared.hpp"
#include "hence/model/region_cache.hpp"

namespace hence::model {

struct TrainConfig {
  double lr{1e-3};
  std::size_t batch{32};
  std::size_t epochs{300};
  /// Epochs without a validation R^2 improvement before stopping.
  std::size_t patience{20};
  std::uint64_t seed{42};
  /// Worker threads for cache refreshes.
  std::size_t threads{1};
  /// Stop once the training-split MSE of the end-of-epoch parameters drops
  /// below this value.
  std::optional<double> stop_below_loss;
  /// Upper bound on optimizer steps; 0 means unbounded.
  std::size_t max_steps{0};

  void validate() const;
};

struct EpochLog {
  std::size_t epoch{0};
  std::size_t steps{0};  // cumulative optimizer steps
  double train_loss{0.0};
  std::optional<Metrics> val;
  std::size_t cache_refreshes{0};  // refreshes performed for this epoch
  /// End-of-epoch training MSE, only computed when stop_below_loss is set.
  std::optional<double> train_mse;
};

/// Observation points for instrumented runs.
struct TrainHooks {
  /// A fresh cache has been installed for `epoch`.
  std::function<void(std::size_t epoch, const RegionCache& cache)> on_cache_refresh;
  /// One optimizer step finished; `cache` is null when the region level is off.
  std::function<void(std::size_t epoch, std::size_t step, const RegionCache* cache)> on_step;
};

struct TrainResult {
  std::vector<EpochLog> log;
  std::size_t steps{0};
  std::size_t cache_refreshes{0};
  std::optional<std::size_t> best_epoch;
  double best_val_r2{std::numeric_limits<double>::quiet_NaN()};
  bool early_stopped{false};
};

/// Minibatch Adam on the MSE of normalized labels. Each epoch starts from a
/// cache refreshed under the current parameters and keeps it constant; the
/// parameters with the best validation R^2 are restored at the end.
/// Throws std::invalid_argument on an empty training split.
TrainResult train(HenceModel& model, const PreparedData& data, std::span<const std::int64_t> train_ids,
                  std::span<const std::int64_t> val_ids, const TrainConfig& config, const TrainHooks& hooks = {});

struct Evaluation {
  Metrics normalized;
  Metrics raw;
  std::vector<std::int64_t> region_ids;
  std::vector<double> target;      // normalized
  std::vector<double> prediction;  // normalized
};

/// Metrics over labeled regions with a given cache (ignored when the region
/// level is ablated).
Evaluation evaluate(const HenceModel& model, const PreparedData& data, std::span<const std::int64_t> ids,
                    const RegionCache* cache);

/// Same, computing a cache from the current parameters first.
Evaluation evaluate(const HenceModel& model, const PreparedData& data, std::span<const std::int64_t> ids,
                    std::size_t threads = 1);

}  // namespace hence::model
