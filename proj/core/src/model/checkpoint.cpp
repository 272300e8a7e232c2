#include "hence/model/checkpoint.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace hence::model {
namespace {

nlohmann::json zscore_json(const ZScore& z) { return {{"mean", z.mean}, {"std", z.std}}; }

ZScore zscore_from_json(const nlohmann::json& j) {
  ZScore z;
  z.mean = j.at("mean").get<std::vector<double>>();
  z.std = j.at("std").get<std::vector<double>>();
  if (z.mean.size() != z.std.size()) throw std::runtime_error("checkpoint: ragged normalization statistics");
  return z;
}

}  // namespace

nlohmann::json config_json(const ModelConfig& c) {
  return {{"hidden", c.hidden},
          {"layers", c.layers},
          {"road_layers", c.road_layers},
          {"pooling", graph::pooling_name(c.pooling)},
          {"ablation", ablation_name(c.ablation)},
          {"slope", c.slope},
          {"min_flow", c.min_flow},
          {"seed", c.seed}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.hidden = j.at("hidden").get<std::size_t>();
  c.layers = j.at("layers").get<std::size_t>();
  c.road_layers = j.at("road_layers").get<std::size_t>();
  c.pooling = graph::parse_pooling(j.at("pooling").get<std::string>());
  c.ablation = parse_ablation(j.at("ablation").get<std::string>());
  c.slope = j.at("slope").get<double>();
  c.min_flow = j.at("min_flow").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

nlohmann::json checkpoint_json(const HenceModel& model, const Normalizer& normalizer) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : model.parameters().all()) {
    params.push_back({{"name", p.name},
                      {"shape", {p.tensor.rows(), p.tensor.cols()}},
                      {"values", std::vector<double>(p.tensor.values().begin(), p.tensor.values().end())}});
  }
  return {{"format", kCheckpointFormat},
          {"config", config_json(model.config())},
          {"normalizer",
           {{"node", zscore_json(normalizer.node)},
            {"edge", zscore_json(normalizer.edge)},
            {"community_flow", zscore_json(normalizer.community_flow)},
            {"region_flow", zscore_json(normalizer.region_flow)},
            {"label", zscore_json(normalizer.label)}}},
          {"params", params}};
}

void save_checkpoint(const HenceModel& model, const Normalizer& normalizer, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << checkpoint_json(model, normalizer).dump(1) << '\n';
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

LoadedCheckpoint checkpoint_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", std::string()) != kCheckpointFormat) {
    throw std::runtime_error(std::string("checkpoint: expected format tag '") + kCheckpointFormat + "'");
  }
  HenceModel model(config_from_json(j.at("config")));
  const auto& n = j.at("normalizer");
  Normalizer norm;
  norm.node = zscore_from_json(n.at("node"));
  norm.edge = zscore_from_json(n.at("edge"));
  norm.community_flow = zscore_from_json(n.at("community_flow"));
  norm.region_flow = zscore_from_json(n.at("region_flow"));
  norm.label = zscore_from_json(n.at("label"));

  std::set<std::string> loaded;
  for (const auto& entry : j.at("params")) {
    const auto name = entry.at("name").get<std::string>();
    if (!model.parameters().contains(name)) throw std::runtime_error("checkpoint: unexpected parameter " + name);
    auto& p = model.parameters().at(name);
    const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    const auto values = entry.at("values").get<std::vector<double>>();
    if (shape.size() != 2 || shape[0] != p.tensor.rows() || shape[1] != p.tensor.cols() ||
        values.size() != p.tensor.size()) {
      throw std::runtime_error("checkpoint: shape mismatch for " + name);
    }
    std::copy(values.begin(), values.end(), p.tensor.mutable_values().begin());
    loaded.insert(name);
  }
  if (loaded.size() != model.parameters().size()) throw std::runtime_error("checkpoint: missing parameters");
  model.mark_trained();
  return {std::move(model), std::move(norm)};
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace hence::model
