#include "hence_cli/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <nlohmann/json.hpp>

#include "hence/data/dataset.hpp"
#include "hence/data/split.hpp"
#include "hence/data/synthetic.hpp"
#include "hence/error.hpp"
#include "hence/model/checkpoint.hpp"
#include "hence/model/hence_model.hpp"
#include "hence/model/prepared.hpp"
#include "hence/model/trainer.hpp"
#include "hence_cli/run_config.hpp"

namespace hence::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void use_stderr_logging() {
  static const bool configured = [] {
    auto logger = spdlog::stderr_color_mt("hence");
    spdlog::set_default_logger(logger);
    return true;
  }();
  (void)configured;
}

data::Dataset load(const std::string& dir) {
  auto result = data::load_dataset(dir);
  for (const auto& w : result.warnings) spdlog::warn("{}", w);
  return std::move(result.dataset);
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

json metrics_json(const model::Metrics& m) { return {{"r2", m.r2}, {"mae", m.mae}, {"rmse", m.rmse}}; }

std::string number_or_empty(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); }

struct Loaded {
  json raw;
  model::LoadedCheckpoint checkpoint;
};

Loaded read_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({"cannot read checkpoint " + path});
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError({"checkpoint " + path + " is not valid JSON"});
  }
  auto checkpoint = model::checkpoint_from_json(j);
  return {std::move(j), std::move(checkpoint)};
}

int run_gen_synth(const data::SynthParams& p, const std::string& out_dir, std::ostream& out) {
  const auto ds = data::generate_synthetic(p);
  data::write_dataset(ds, out_dir);
  out << fmt::format("wrote {} regions, {} OD records, {} labels to {}\n", ds.regions.size(), ds.od.size(),
                     ds.labels.size(), out_dir);
  return kExitOk;
}

int run_train(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  const auto ds = load(cfg.data_dir);
  const auto split = data::split_dataset(ds, cfg.split, cfg.seed);
  spdlog::info("split: {} train, {} val, {} test regions", split.train.size(), split.val.size(), split.test.size());
  const auto normalizer = model::Normalizer::fit(ds, split.train);
  model::HenceModel net(cfg.model_config());
  const auto prepared = model::prepare(ds, normalizer, net.config());
  spdlog::info("model: {} parameter tensors, {} scalars, ablation {}", net.parameters().size(),
               net.parameters().scalar_count(), model::ablation_name(net.config().ablation));

  const auto result = model::train(net, prepared, split.train, split.val, cfg.train_config());

  const fs::path dir = cfg.out_dir;
  fs::create_directories(dir);
  open_output(dir / "effective_config.txt") << cfg.to_text();
  {
    auto log = open_output(dir / "train_log.csv");
    log << "epoch,steps,train_loss,val_r2,val_mae,val_rmse,cache_refreshes\n";
    for (const auto& e : result.log) {
      log << fmt::format("{},{},{},{},{},{},{}\n", e.epoch, e.steps, e.train_loss,
                         number_or_empty(e.val ? std::optional(e.val->r2) : std::nullopt),
                         number_or_empty(e.val ? std::optional(e.val->mae) : std::nullopt),
                         number_or_empty(e.val ? std::optional(e.val->rmse) : std::nullopt), e.cache_refreshes);
    }
  }
  json ck = model::checkpoint_json(net, normalizer);
  ck["run"] = {{"split", {cfg.split.train, cfg.split.val, cfg.split.test}},
               {"seed", cfg.seed},
               {"train", split.train},
               {"val", split.val},
               {"test", split.test}};
  open_output(dir / "checkpoint.json") << ck.dump(1) << '\n';

  const auto val = model::evaluate(net, prepared, split.val, cfg.threads);
  const auto test = model::evaluate(net, prepared, split.test, cfg.threads);
  const json summary = {{"steps", result.steps},
                        {"epochs", result.log.size()},
                        {"cache_refreshes", result.cache_refreshes},
                        {"val", metrics_json(val.normalized)},
                        {"test", metrics_json(test.normalized)},
                        {"test_raw", metrics_json(test.raw)}};
  open_output(dir / "metrics.json") << summary.dump(1) << '\n';
  out << fmt::format("trained {} epochs ({} steps, {} cache refreshes); outputs in {}\n", result.log.size(),
                     result.steps, result.cache_refreshes, dir.string());
  return kExitOk;
}

std::vector<std::int64_t> split_ids(const json& ck, const data::Dataset& ds, const std::string& which) {
  if (ck.contains("run") && ck["run"].contains(which)) {
    auto ids = ck["run"][which].get<std::vector<std::int64_t>>();
    for (std::int64_t id : ids) {
      if (!ds.labels.count(id)) {
        throw ValidationError({fmt::format("region {} of the stored {} split has no label in this dataset", id, which)});
      }
    }
    return ids;
  }
  const auto split = data::split_dataset(ds, {}, 42);
  return which == "train" ? split.train : which == "val" ? split.val : split.test;
}

int run_eval(const std::string& checkpoint, const std::string& data_dir, const std::string& which,
             std::ostream& out) {
  auto loaded = read_checkpoint(checkpoint);
  const auto ds = load(data_dir);
  const auto ids = split_ids(loaded.raw, ds, which);
  const auto& net = loaded.checkpoint.model;
  const auto prepared = model::prepare(ds, loaded.checkpoint.normalizer, net.config());
  const auto ev = model::evaluate(net, prepared, ids, std::size_t{1});
  json j = metrics_json(ev.normalized);
  j["split"] = which;
  j["n"] = ids.size();
  j["raw"] = metrics_json(ev.raw);
  out << j.dump() << '\n';
  return kExitOk;
}

int run_predict(const std::string& checkpoint, const std::string& data_dir, const std::string& out_path,
                std::ostream& out) {
  auto loaded = read_checkpoint(checkpoint);
  const auto ds = load(data_dir);
  const auto& net = loaded.checkpoint.model;
  const auto prepared = model::prepare(ds, loaded.checkpoint.normalizer, net.config());
  const ad::NoGradGuard no_grad;
  std::optional<model::RegionCache> cache;
  if (net.config().region_level()) cache = model::refresh_region_cache(net, prepared, -1);
  auto csv = open_output(out_path);
  csv << "region_id,prediction_raw,prediction_normalized\n";
  for (std::size_t r = 0; r < prepared.size(); ++r) {
    const double z = net.predict_region(prepared, r, cache ? &*cache : nullptr).item();
    csv << fmt::format("{},{},{}\n", prepared.regions[r].region_id, prepared.normalizer.label_inverse(z), z);
  }
  out << fmt::format("wrote {} predictions to {}\n", prepared.size(), out_path);
  return kExitOk;
}

int run_dump_attention(const std::string& checkpoint, const std::string& data_dir, const std::string& out_path,
                       std::ostream& out) {
  auto loaded = read_checkpoint(checkpoint);
  const auto ds = load(data_dir);
  const auto& net = loaded.checkpoint.model;
  const auto prepared = model::prepare(ds, loaded.checkpoint.normalizer, net.config());
  const ad::NoGradGuard no_grad;
  std::optional<model::RegionCache> cache;
  if (net.config().region_level()) cache = model::refresh_region_cache(net, prepared, -1);
  auto csv = open_output(out_path);
  csv << "region_id,community_beta_rn,community_beta_od,region_beta_rn,region_beta_od,beta_intra,beta_inter\n";
  auto cell = [](double v) { return std::isnan(v) ? std::string() : fmt::format("{}", v); };
  for (std::size_t r = 0; r < prepared.size(); ++r) {
    model::AttentionTrace trace;
    (void)net.predict_region(prepared, r, cache ? &*cache : nullptr, &trace);
    csv << fmt::format("{},{},{},{},{},{},{}\n", trace.region_id, cell(trace.community_beta[0]),
                       cell(trace.community_beta[1]), cell(trace.region_beta[0]), cell(trace.region_beta[1]),
                       cell(trace.scale_beta[0]), cell(trace.scale_beta[1]));
  }
  out << fmt::format("wrote attention weights of {} regions to {}\n", prepared.size(), out_path);
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  use_stderr_logging();
  CLI::App app{"Hierarchical heterogeneous graph model for regional carbon-emission regression", "hence"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-synth", "Generate a synthetic dataset");
  data::SynthParams synth;
  std::string gen_out;
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--regions", synth.n_regions, "Number of regions")->required();
  gen->add_option("--seed", synth.seed, "Random seed");
  gen->add_option("--grid-side", synth.grid_side, "Intersections per side of each region grid");
  gen->add_option("--communities", synth.communities_per_region, "Communities per region");
  gen->add_option("--noise-std", synth.noise_std, "Lognormal label noise");
  gen->add_option("--gamma", synth.gravity_exponent, "Gravity exponent");
  gen->add_option("--edge-drop", synth.edge_drop_prob, "Probability of deleting a grid segment");
  gen->add_option("--inter-radius", synth.inter_od_radius, "Grid radius of inter-region OD flows");
  gen->add_option("--spacing-sigma", synth.spacing_sigma, "Lognormal spread of node spacing per region");
  gen->add_option("--intra-scale", synth.intra_flow_scale, "Scale of intra-region gravity flows");
  gen->add_option("--inter-scale", synth.inter_flow_scale, "Scale of inter-region gravity flows");
  gen->add_option("--block-spacing-sigma", synth.block_spacing_sigma, "Lognormal spread of block street gaps");
  gen->add_option("--density-exponent", synth.density_exponent, "Population exponent on intersection density");
  gen->add_option("--population-sigma", synth.population_sigma, "Lognormal spread of community populations");
  gen->add_option("--propensity-sigma", synth.propensity_sigma, "Lognormal spread of trip propensities");

  auto* tr = app.add_subcommand("train", "Train a model");
  std::string config_file;
  tr->add_option("--config", config_file, "key=value configuration file");
  std::map<std::string, std::string> overrides;
  for (const auto& key : run_config_keys()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    tr->add_option(flag, overrides[key], "Override " + key);
  }

  std::string checkpoint;
  std::string data_dir;
  std::string which = "test";
  std::string out_path;
  auto* ev = app.add_subcommand("eval", "Print metrics of a checkpoint as JSON");
  ev->add_option("--checkpoint", checkpoint)->required();
  ev->add_option("--data", data_dir)->required();
  ev->add_option("--split", which)->check(CLI::IsMember({"train", "val", "test"}));
  auto* pr = app.add_subcommand("predict", "Write per-region predictions as CSV");
  pr->add_option("--checkpoint", checkpoint)->required();
  pr->add_option("--data", data_dir)->required();
  pr->add_option("--out", out_path)->required();
  auto* da = app.add_subcommand("dump-attention", "Write per-region fusion weights as CSV");
  da->add_option("--checkpoint", checkpoint)->required();
  da->add_option("--data", data_dir)->required();
  da->add_option("--out", out_path)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (*gen) return run_gen_synth(synth, gen_out, out);
    if (*tr) {
      RunConfig cfg;
      if (!config_file.empty()) cfg = read_run_config(config_file);
      for (const auto& key : run_config_keys()) {
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        if (tr->count(flag) > 0) cfg.set(key, overrides[key]);
      }
      return run_train(cfg, out);
    }
    if (*ev) return run_eval(checkpoint, data_dir, which, out);
    if (*pr) return run_predict(checkpoint, data_dir, out_path, out);
    if (*da) return run_dump_attention(checkpoint, data_dir, out_path, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    for (const auto& issue : e.issues()) err << "  " << issue << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << '\n';
    return kExitRuntime;
  }
  err << app.help();
  return kExitValidation;
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + std::max(argc, 1));
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace hence::cli
