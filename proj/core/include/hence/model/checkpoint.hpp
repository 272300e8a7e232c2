#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "hence/model/hence_model.hpp"
#include "hence/model/normalizer.hpp"

namespace hence::model {

inline constexpr const char* kCheckpointFormat = "hence-v1";

/// Self-describing JSON archive: format tag, model configuration,
/// normalization statistics and every parameter as name, shape and values.
nlohmann::json checkpoint_json(const HenceModel& model, const Normalizer& normalizer);
void save_checkpoint(const HenceModel& model, const Normalizer& normalizer, const std::filesystem::path& path);

struct LoadedCheckpoint {
  HenceModel model;
  Normalizer normalizer;
};

/// Rebuilds the model from its configuration and copies the stored values.
/// Throws std::runtime_error on a wrong format tag, missing or surplus
/// parameters and shape mismatches.
LoadedCheckpoint checkpoint_from_json(const nlohmann::json& j);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::json config_json(const ModelConfig& c);
ModelConfig config_from_json(const nlohmann::json& j);

}  // namespace hence::model
