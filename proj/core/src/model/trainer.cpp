#include "hence/model/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include <spdlog/spdlog.h>

#include "hence/autodiff/adam.hpp"
#include "hence/autodiff/ops.hpp"

namespace hence::model {
namespace {

double label_of(const PreparedData& data, std::int64_t region) {
  const auto it = data.labels.find(region);
  if (it == data.labels.end()) throw std::invalid_argument("region " + std::to_string(region) + " has no label");
  return it->second;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (batch < 1) throw std::invalid_argument("batch must be at least 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
}

TrainResult train(HenceModel& model, const PreparedData& data, std::span<const std::int64_t> train_ids,
                  std::span<const std::int64_t> val_ids, const TrainConfig& config, const TrainHooks& hooks) {
  config.validate();
  if (train_ids.empty()) throw std::invalid_argument("train: empty training split");
  std::vector<std::size_t> order = data.positions(train_ids);
  std::vector<double> targets(data.size(), 0.0);
  for (std::int64_t id : train_ids) targets[data.position(id)] = label_of(data, id);

  const bool region_level = model.config().region_level();
  auto& params = model.parameters();
  ad::AdamState adam = ad::make_adam_state(params, {config.lr});
  std::mt19937_64 rng(config.seed);

  TrainResult result;
  std::optional<RegionCache> cache;
  if (region_level) {
    cache = refresh_region_cache(model, data, 0, config.threads);
    ++result.cache_refreshes;
    if (hooks.on_cache_refresh) hooks.on_cache_refresh(0, *cache);
  }

  std::vector<std::vector<double>> best;
  std::size_t since_best = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    bool step_budget_hit = false;
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      if (config.max_steps && result.steps >= config.max_steps) {
        step_budget_hit = true;
        break;
      }
      const std::size_t end = std::min(start + config.batch, order.size());
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      std::vector<double> y;
      y.reserve(batch.size());
      for (std::size_t r : batch) y.push_back(targets[r]);
      const ad::Tensor pred = model.predict(data, batch, cache ? &*cache : nullptr);
      const ad::Tensor loss = ad::mse_loss(pred, ad::Tensor::column(std::move(y)));
      params.zero_grad();
      ad::backward(loss);
      ad::adam_step(params, adam);
      ++result.steps;
      loss_sum += loss.item() * static_cast<double>(batch.size());
      seen += batch.size();
      if (hooks.on_step) hooks.on_step(epoch, result.steps, cache ? &*cache : nullptr);
    }
    if (config.max_steps && result.steps >= config.max_steps) step_budget_hit = true;
    if (seen == 0) break;

    EpochLog entry;
    entry.epoch = epoch;
    entry.steps = result.steps;
    entry.train_loss = loss_sum / static_cast<double>(seen);
    entry.cache_refreshes = region_level ? 1 : 0;

    // The cache for the next epoch reflects the current parameters, so it
    // also serves the validation pass.
    std::optional<RegionCache> next;
    if (region_level) next = refresh_region_cache(model, data, static_cast<std::int64_t>(epoch) + 1, config.threads);
    if (!val_ids.empty()) entry.val = evaluate(model, data, val_ids, next ? &*next : nullptr).normalized;
    if (config.stop_below_loss) {
      const double rmse = evaluate(model, data, train_ids, next ? &*next : nullptr).normalized.rmse;
      entry.train_mse = rmse * rmse;
    }

    if (entry.val) {
      spdlog::info("epoch {} steps {} train_loss {:.6g} val_r2 {:.4f} val_mae {:.4f} val_rmse {:.4f}", epoch,
                   result.steps, entry.train_loss, entry.val->r2, entry.val->mae, entry.val->rmse);
    } else {
      spdlog::info("epoch {} steps {} train_loss {:.6g}", epoch, result.steps, entry.train_loss);
    }
    result.log.push_back(entry);

    if (entry.val) {
      if (entry.val->r2 > result.best_val_r2 || (!result.best_epoch && !std::isnan(entry.val->r2))) {
        result.best_val_r2 = entry.val->r2;
        result.best_epoch = epoch;
        best = params.snapshot();
        since_best = 0;
      } else if (++since_best >= config.patience) {
        result.early_stopped = true;
        spdlog::info("early stop after {} epochs without validation improvement", config.patience);
        break;
      }
    }
    if (entry.train_mse && *entry.train_mse < *config.stop_below_loss) break;
    if (step_budget_hit || epoch + 1 == config.epochs) break;

    if (region_level) {
      cache = std::move(next);
      ++result.cache_refreshes;
      if (hooks.on_cache_refresh) hooks.on_cache_refresh(epoch + 1, *cache);
    }
  }
  if (!best.empty()) params.restore(best);
  model.mark_trained();
  return result;
}

Evaluation evaluate(const HenceModel& model, const PreparedData& data, std::span<const std::int64_t> ids,
                    const RegionCache* cache) {
  if (ids.empty()) throw std::invalid_argument("evaluate: empty split");
  const ad::NoGradGuard no_grad;
  Evaluation ev;
  ev.region_ids.assign(ids.begin(), ids.end());
  const auto positions = data.positions(ids);
  const ad::Tensor pred = model.predict(data, positions, model.config().region_level() ? cache : nullptr);
  ev.prediction.assign(pred.values().begin(), pred.values().end());
  std::vector<double> raw_target;
  std::vector<double> raw_pred;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    ev.target.push_back(label_of(data, ids[i]));
    raw_target.push_back(data.normalizer.label_inverse(ev.target.back()));
    raw_pred.push_back(data.normalizer.label_inverse(ev.prediction[i]));
  }
  ev.normalized = compute_metrics(ev.target, ev.prediction);
  ev.raw = compute_metrics(raw_target, raw_pred);
  return ev;
}

Evaluation evaluate(const HenceModel& model, const PreparedData& data, std::span<const std::int64_t> ids,
                    std::size_t threads) {
  if (!model.config().region_level()) return evaluate(model, data, ids, nullptr);
  const RegionCache cache = refresh_region_cache(model, data, -1, threads);
  return evaluate(model, data, ids, &cache);
}

}  // namespace hence::model
