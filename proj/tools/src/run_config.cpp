#include "hence_cli/run_config.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hence/error.hpp"

namespace hence::cli {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view what) {
  throw ValidationError({fmt::format("{}: '{}' is not {}", key, value, what)});
}

template <typename T>
T number(std::string_view key, std::string_view value, std::string_view what) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (value.empty() || ec != std::errc() || ptr != end) bad(key, value, what);
  return out;
}

bool one_of(std::size_t v, std::initializer_list<std::size_t> allowed) {
  for (std::size_t a : allowed)
    if (a == v) return true;
  return false;
}

}  // namespace

const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys{"data_dir", "out_dir", "layers",  "road_layers", "hidden",
                                             "lr",       "batch",   "pooling", "ablation",    "seed",
                                             "epochs",   "patience", "split",  "threads",     "min_flow"};
  return keys;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "data_dir") {
    data_dir = value;
  } else if (key == "out_dir") {
    out_dir = value;
  } else if (key == "layers") {
    layers = number<std::size_t>(key, value, "an integer");
  } else if (key == "road_layers") {
    road_layers = number<std::size_t>(key, value, "an integer");
  } else if (key == "hidden") {
    hidden = number<std::size_t>(key, value, "an integer");
  } else if (key == "lr") {
    lr = number<double>(key, value, "a number");
  } else if (key == "batch") {
    batch = number<std::size_t>(key, value, "an integer");
  } else if (key == "pooling") {
    try {
      pooling = graph::parse_pooling(value);
    } catch (const std::invalid_argument&) {
      bad(key, value, "one of mean, sum, max");
    }
  } else if (key == "ablation") {
    try {
      ablation = model::parse_ablation(value);
    } catch (const std::invalid_argument&) {
      bad(key, value, "one of none, no_spatial_link, no_od_link, no_community_level, no_region_level");
    }
  } else if (key == "seed") {
    seed = number<std::uint64_t>(key, value, "a non-negative integer");
  } else if (key == "epochs") {
    epochs = number<std::size_t>(key, value, "an integer");
  } else if (key == "patience") {
    patience = number<std::size_t>(key, value, "an integer");
  } else if (key == "split") {
    std::vector<double> parts;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = value.find(',', start);
      parts.push_back(number<double>(key, trim(value.substr(start, comma - start)), "three comma-separated fractions"));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (parts.size() != 3) bad(key, value, "three comma-separated fractions");
    split = {parts[0], parts[1], parts[2]};
  } else if (key == "threads") {
    threads = number<std::size_t>(key, value, "an integer");
  } else if (key == "min_flow") {
    min_flow = number<double>(key, value, "a number");
  } else {
    throw ValidationError({fmt::format("unknown configuration key '{}'", key)});
  }
}

void RunConfig::validate() const {
  std::vector<std::string> issues;
  if (data_dir.empty()) issues.push_back("data_dir is required");
  if (out_dir.empty()) issues.push_back("out_dir must not be empty");
  if (!one_of(layers, {2, 3, 4})) issues.push_back(fmt::format("layers must be 2, 3 or 4 (got {})", layers));
  if (!one_of(road_layers, {2, 3, 4})) {
    issues.push_back(fmt::format("road_layers must be 2, 3 or 4 (got {})", road_layers));
  }
  if (hidden < 2) issues.push_back(fmt::format("hidden must be at least 2 (got {})", hidden));
  if (!(lr >= 1e-4 && lr <= 5e-2)) issues.push_back(fmt::format("lr must lie in [1e-4, 5e-2] (got {})", lr));
  if (!one_of(batch, {8, 16, 32, 64})) issues.push_back(fmt::format("batch must be 8, 16, 32 or 64 (got {})", batch));
  if (epochs < 1) issues.push_back("epochs must be at least 1");
  if (patience < 1) issues.push_back("patience must be at least 1");
  if (threads < 1) issues.push_back("threads must be at least 1");
  if (!(min_flow >= 0.0)) issues.push_back("min_flow must be non-negative");
  try {
    data::check_fractions(split);
  } catch (const std::invalid_argument& e) {
    issues.push_back(e.what());
  }
  if (!issues.empty()) throw ValidationError("invalid configuration:", std::move(issues));
}

std::string RunConfig::to_text() const {
  std::string out;
  out += fmt::format("data_dir={}\n", data_dir);
  out += fmt::format("out_dir={}\n", out_dir);
  out += fmt::format("layers={}\n", layers);
  out += fmt::format("road_layers={}\n", road_layers);
  out += fmt::format("hidden={}\n", hidden);
  out += fmt::format("lr={}\n", lr);
  out += fmt::format("batch={}\n", batch);
  out += fmt::format("pooling={}\n", graph::pooling_name(pooling));
  out += fmt::format("ablation={}\n", model::ablation_name(ablation));
  out += fmt::format("seed={}\n", seed);
  out += fmt::format("epochs={}\n", epochs);
  out += fmt::format("patience={}\n", patience);
  out += fmt::format("split={},{},{}\n", split.train, split.val, split.test);
  out += fmt::format("threads={}\n", threads);
  out += fmt::format("min_flow={}\n", min_flow);
  return out;
}

model::ModelConfig RunConfig::model_config() const {
  model::ModelConfig c;
  c.hidden = hidden;
  c.layers = layers;
  c.road_layers = road_layers;
  c.pooling = pooling;
  c.ablation = ablation;
  c.min_flow = min_flow;
  c.seed = seed;
  return c;
}

model::TrainConfig RunConfig::train_config() const {
  model::TrainConfig c;
  c.lr = lr;
  c.batch = batch;
  c.epochs = epochs;
  c.patience = patience;
  c.seed = seed;
  c.threads = threads;
  return c;
}

RunConfig parse_run_config(std::string_view text, RunConfig base) {
  std::vector<std::string> issues;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    const std::string_view line = trim(text.substr(start, nl == std::string_view::npos ? nl : nl - start));
    ++line_no;
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      issues.push_back(fmt::format("line {}: expected key=value", line_no));
      continue;
    }
    try {
      base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ValidationError& e) {
      for (const auto& issue : e.issues()) issues.push_back(fmt::format("line {}: {}", line_no, issue));
    }
  }
  if (!issues.empty()) throw ValidationError("invalid configuration file:", std::move(issues));
  return base;
}

RunConfig read_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ValidationError({"cannot read configuration file " + path.string()});
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str(), std::move(base));
}

}  // namespace hence::cli
