#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hence/data/split.hpp"
#include "hence/model/config.hpp"
#include "hence/model/trainer.hpp"

namespace hence::cli {

/// Everything a `train` invocation needs. One seed drives the split, the
/// parameter initialization and the minibatch order.
struct RunConfig {
  std::string data_dir;
  std::string out_dir{"hence_run"};
  std::size_t layers{3};
  std::size_t road_layers{3};
  std::size_t hidden{64};
  double lr{1e-3};
  std::size_t batch{32};
  graph::Pooling pooling{graph::Pooling::mean};
  model::Ablation ablation{model::Ablation::none};
  std::uint64_t seed{42};
  std::size_t epochs{300};
  std::size_t patience{20};
  data::SplitFractions split;
  std::size_t threads{1};
  double min_flow{0.0};

  /// Sets one key from its text form. Throws ValidationError on an unknown
  /// key or unparsable value.
  void set(std::string_view key, std::string_view value);
  /// Throws ValidationError listing every out-of-domain value.
  void validate() const;
  /// key=value lines, one per key, in a fixed order.
  [[nodiscard]] std::string to_text() const;

  [[nodiscard]] model::ModelConfig model_config() const;
  [[nodiscard]] model::TrainConfig train_config() const;

  friend bool operator==(const RunConfig& a, const RunConfig& b) { return a.to_text() == b.to_text(); }
};

/// All keys accepted by RunConfig::set, in file order.
const std::vector<std::string>& run_config_keys();

/// Parses key=value text; blank lines and '#' comments are skipped.
/// Later lines override earlier ones.
RunConfig parse_run_config(std::string_view text, RunConfig base = {});
RunConfig read_run_config(const std::filesystem::path& path, RunConfig base = {});

}  // namespace hence::cli
