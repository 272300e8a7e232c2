#include "hence/model/hence_model.hpp"

#include <random>
#include <stdexcept>
#include <string>

#include "hence/autodiff/ops.hpp"
#include "hence/graph/pooling.hpp"

namespace hence::model {
namespace {

std::string layer_prefix(const char* level, std::size_t l) { return std::string(level) + ".layer" + std::to_string(l); }

/// Column means of an N x 2 weight matrix.
std::array<double, 2> mean_pair(const ad::Tensor& beta) {
  std::array<double, 2> out{0.0, 0.0};
  for (std::size_t i = 0; i < beta.rows(); ++i) {
    out[0] += beta.at(i, 0);
    out[1] += beta.at(i, 1);
  }
  out[0] /= static_cast<double>(beta.rows());
  out[1] /= static_cast<double>(beta.rows());
  return out;
}

}  // namespace

HenceModel::HenceModel(ModelConfig config) : config_(config) {
  config_.validate();
  build();
}

void HenceModel::set_ablation(Ablation variant) {
  if (trained_) throw std::logic_error("set_ablation: the ablation must be chosen before training");
  config_.ablation = variant;
  build();
}

void HenceModel::build() {
  params_ = ad::ParameterSet();
  road_.clear();
  community_.clear();
  region_.clear();
  community_od_embed_.reset();
  region_od_embed_.reset();
  final_fusion_.reset();

  std::mt19937_64 rng(config_.seed);
  const std::size_t d = config_.hidden;
  const std::size_t node_raw = graph::RoadGraph::kNodeFeatures;
  const std::size_t edge_raw = graph::RoadGraph::kEdgeFeatures;

  for (std::size_t l = 0; l < config_.road_layers; ++l) {
    const bool last = l + 1 == config_.road_layers;
    const egat::EgatDims dims{l == 0 ? node_raw : d, l == 0 ? edge_raw : d, d, d, d};
    // The last road layer's edge output is only consumed by community pooling.
    road_.push_back(egat::make_egat_params(params_, layer_prefix("road", l), dims,
                                           !last || config_.community_level(), rng));
  }

  auto hetero_stack = [&](const char* level, std::size_t node_in0, std::size_t spatial_in0) {
    std::vector<egat::HeteroLayerParams> layers;
    for (std::size_t l = 0; l < config_.layers; ++l) {
      const bool update = l + 1 < config_.layers;
      const std::string prefix = layer_prefix(level, l);
      const std::size_t node_in = l == 0 ? node_in0 : d;
      egat::HeteroLayerParams p;
      if (config_.spatial_links()) {
        p.spatial = egat::make_egat_params(params_, prefix + ".rn", {node_in, l == 0 ? spatial_in0 : d, d, d, d},
                                           update, rng);
      }
      if (config_.od_links()) {
        p.od = egat::make_egat_params(params_, prefix + ".od", {node_in, d, d, d, d}, update, rng);
      }
      if (p.spatial && p.od) p.fusion = egat::make_fusion_params(params_, prefix + ".fusion", d, rng);
      layers.push_back(std::move(p));
    }
    return layers;
  };
  auto flow_embedding = [&](const std::string& prefix) {
    FlowEmbedding e;
    e.W = params_.add(prefix + ".W", {1, d}, {}, rng);
    e.b = params_.add(prefix + ".b", {1, d}, {ad::InitKind::zeros, 0, 0}, rng);
    return e;
  };

  if (config_.community_level()) {
    if (config_.od_links()) community_od_embed_ = flow_embedding("community.od_embed");
    community_ = hetero_stack("community", 2 * d, d);
  }
  if (config_.region_level()) {
    if (config_.od_links()) region_od_embed_ = flow_embedding("region.od_embed");
    region_ = hetero_stack("region", d, edge_raw);
    final_fusion_ = egat::make_fusion_params(params_, "final_fusion", d, rng);
  }
  const std::size_t half = std::max<std::size_t>(d / 2, 1);
  head_.W1 = params_.add("head.W1", {d, half}, {}, rng);
  head_.b1 = params_.add("head.b1", {1, half}, {ad::InitKind::zeros, 0, 0}, rng);
  head_.W2 = params_.add("head.W2", {half, 1}, {}, rng);
  head_.b2 = params_.add("head.b2", {1, 1}, {ad::InitKind::zeros, 0, 0}, rng);
}

void HenceModel::check_compatible(const PreparedData& data) const {
  const auto& c = data.config;
  if (c.layers != config_.layers || c.ablation != config_.ablation || c.pooling != config_.pooling ||
      c.min_flow != config_.min_flow) {
    throw std::invalid_argument("prepared data was built for a different model configuration");
  }
}

ad::Tensor HenceModel::embed(const FlowEmbedding& e, const ad::Tensor& normalized_flow) const {
  return ad::add_row(ad::matmul(normalized_flow, e.W), e.b);
}

HenceModel::RoadOutput HenceModel::road_level(const PreparedRegion& region) const {
  const auto out = egat::stack_egat(region.node_feats, region.edge_feats, region.arcs, road_, config_.slope);
  return {out.nodes, out.edges};
}

ad::Tensor HenceModel::intra_region_representation(const PreparedData& data, std::size_t region,
                                                   AttentionTrace* trace) const {
  check_compatible(data);
  const PreparedRegion& pr = data.regions.at(region);
  if (pr.node_feats.rows() == 0) {
    throw std::invalid_argument("region " + std::to_string(pr.region_id) + " has no intersections");
  }
  if (trace) trace->region_id = pr.region_id;
  const RoadOutput road = road_level(pr);
  const std::vector<std::size_t> one_group(pr.node_community.size(), 0);
  if (!config_.community_level()) return graph::pool_nodes(config_.pooling, road.nodes, one_group, 1);

  const std::size_t nc = pr.community_ids.size();
  const ad::Tensor features =
      ad::concat_columns({graph::pool_nodes(config_.pooling, road.nodes, pr.node_community, nc),
                          graph::pool_internal_edges(config_.pooling, road.edges, pr.arcs, pr.node_community, nc)});
  graph::HeteroGraph g = graph::build_community_graph(config_.pooling, features, road.edges, pr.arcs,
                                                      pr.node_community, pr.community_od, config_.min_flow);
  if (!config_.spatial_links()) g.spatial = {};
  if (config_.od_links()) {
    g.od.feats = embed(*community_od_embed_, normalize_flows(g.od.feats, data.normalizer.community_flow));
  } else {
    g.od = {};
  }
  const auto out = egat::stack_hetero(g, community_, nullptr, config_.slope);
  if (trace) trace->community_beta = mean_pair(out.betas.back());
  return graph::pool_nodes(config_.pooling, out.nodes, std::vector<std::size_t>(nc, 0), 1);
}

ad::Tensor HenceModel::inter_region_representation(const PreparedData& data, std::size_t region,
                                                   const ad::Tensor& live_intra, const RegionCache& cache,
                                                   AttentionTrace* trace, bool prune) const {
  check_compatible(data);
  if (!config_.region_level()) throw std::logic_error("inter_region_representation: region level is ablated");
  const RegionView full = prune ? RegionView{} : data.full_view(region);
  const RegionView& view = prune ? data.views.at(region) : full;

  std::vector<ad::Tensor> rows;
  rows.reserve(view.nodes.size());
  for (std::size_t v : view.nodes) rows.push_back(v == region ? live_intra : cache.row(v));

  graph::HeteroGraph g;
  g.level = graph::Level::region;
  g.node_feats = ad::stack_rows(rows);
  g.spatial = {view.spatial_arcs, view.spatial_feats};
  if (config_.od_links()) g.od = {view.od_arcs, embed(*region_od_embed_, view.od_feats)};
  const auto out = egat::stack_hetero(g, region_, prune ? &view.plan : nullptr, config_.slope);
  if (trace) {
    const auto& beta = out.betas.back();
    trace->region_beta = {beta.at(view.target, 0), beta.at(view.target, 1)};
  }
  const std::size_t target[] = {view.target};
  return ad::gather_rows(out.nodes, target);
}

ad::Tensor HenceModel::head(const ad::Tensor& v) const {
  const ad::Tensor hidden = ad::leaky_relu(ad::add_row(ad::matmul(v, head_.W1), head_.b1), config_.slope);
  return ad::add_row(ad::matmul(hidden, head_.W2), head_.b2);
}

ad::Tensor HenceModel::predict_region(const PreparedData& data, std::size_t region, const RegionCache* cache,
                                      AttentionTrace* trace) const {
  const ad::Tensor intra = intra_region_representation(data, region, trace);
  if (!config_.region_level()) return head(intra);
  if (!cache) throw std::invalid_argument("predict_region: the region level needs a region cache");
  const ad::Tensor inter = inter_region_representation(data, region, intra, *cache, trace);
  const ad::Tensor scales[] = {intra, inter};
  const auto fused = egat::attention_fusion(scales, *final_fusion_);
  if (trace) trace->scale_beta = {fused.beta.at(0, 0), fused.beta.at(0, 1)};
  return head(fused.fused);
}

ad::Tensor HenceModel::predict(const PreparedData& data, std::span<const std::size_t> regions,
                               const RegionCache* cache) const {
  std::vector<ad::Tensor> rows;
  rows.reserve(regions.size());
  for (std::size_t r : regions) rows.push_back(predict_region(data, r, cache));
  return ad::stack_rows(rows);
}

}  // namespace hence::model
