#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "hence/autodiff/gradcheck.hpp"
#include "hence/autodiff/ops.hpp"
#include "hence/data/split.hpp"
#include "hence/model/checkpoint.hpp"
#include "hence/model/hence_model.hpp"
#include "hence/model/metrics.hpp"
#include "hence/model/region_cache.hpp"
#include "hence/model/trainer.hpp"
#include "test_support.hpp"

namespace ad = hence::ad;
namespace data = hence::data;
namespace model = hence::model;
using hence::testing::make_world;
using hence::testing::small_config;
using hence::testing::small_world;

namespace {

std::vector<double> vec(const ad::Tensor& t) { return {t.values().begin(), t.values().end()}; }

std::vector<std::size_t> all_positions(const model::PreparedData& d) {
  std::vector<std::size_t> out(d.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

std::vector<double> predictions(const model::HenceModel& m, const model::PreparedData& d) {
  ad::NoGradGuard guard;
  std::optional<model::RegionCache> cache;
  if (m.config().region_level()) cache = model::refresh_region_cache(m, d, 0);
  return vec(m.predict(d, all_positions(d), cache ? &*cache : nullptr));
}

model::ModelConfig variant(model::Ablation a, std::size_t layers = 2) {
  auto c = small_config();
  c.ablation = a;
  c.layers = layers;
  c.road_layers = layers;
  return c;
}

bool has_prefix(const ad::ParameterSet& p, const std::string& prefix) {
  for (const auto& param : p.all())
    if (param.name.rfind(prefix, 0) == 0) return true;
  return false;
}

bool has_fragment(const ad::ParameterSet& p, const std::string& fragment) {
  for (const auto& param : p.all())
    if (param.name.find(fragment) != std::string::npos) return true;
  return false;
}

constexpr model::Ablation kAllVariants[] = {model::Ablation::none, model::Ablation::no_spatial_link,
                                            model::Ablation::no_od_link, model::Ablation::no_community_level,
                                            model::Ablation::no_region_level};

}  // namespace

TEST(Config, AblationNamesRoundTrip) {
  for (auto a : kAllVariants) EXPECT_EQ(model::parse_ablation(model::ablation_name(a)), a);
  EXPECT_THROW((void)model::parse_ablation("no_roads"), std::invalid_argument);
}

TEST(Config, RejectsOutOfDomainValues) {
  auto c = small_config();
  c.hidden = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_config();
  c.layers = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Normalizer, FitsOnTrainRegionsOnly) {
  const auto ds = data::generate_synthetic(small_world(6, 2));
  const std::vector<std::int64_t> train = {1, 2, 3};
  const auto n = model::Normalizer::fit(ds, train);
  double mean = 0.0;
  for (auto id : train) mean += std::log1p(ds.labels.at(id));
  EXPECT_NEAR(n.label.mean[0], mean / 3.0, 1e-12);
  EXPECT_NEAR(n.label_inverse(n.label_forward(123.0)), 123.0, 1e-9);
}

TEST(Normalizer, ConstantColumnKeepsUnitScale) {
  const std::vector<double> rows = {2, 1, 2, 3, 2, 5};
  const auto z = model::ZScore::fit(rows, 2);
  EXPECT_EQ(z.std[0], 1.0);
  EXPECT_EQ(z.forward(2.0, 0), 0.0);
}

TEST(Model, IntraRepresentationIsOneRowPerVariant) {
  for (auto a : kAllVariants) {
    const auto c = variant(a);
    const auto w = make_world(small_world(4, 1), c);
    model::HenceModel m(c);
    const auto intra = m.intra_region_representation(w.prepared, 0);
    EXPECT_EQ(intra.rows(), 1u) << model::ablation_name(a);
    EXPECT_EQ(intra.cols(), c.hidden) << model::ablation_name(a);
  }
}

TEST(Model, SingleCommunityRegionsWork) {
  const auto c = variant(model::Ablation::none);
  const auto w = make_world(small_world(4, 1, 3, 1), c);
  model::HenceModel m(c);
  for (double p : predictions(m, w.prepared)) EXPECT_TRUE(std::isfinite(p));
}

TEST(Model, ParameterSetsFollowTheVariant) {
  auto params = [](model::Ablation a) { return model::HenceModel(variant(a)).parameters().all().size(); };
  const model::HenceModel full(variant(model::Ablation::none));
  EXPECT_TRUE(has_prefix(full.parameters(), "community.od_embed"));
  EXPECT_TRUE(has_prefix(full.parameters(), "final_fusion"));
  EXPECT_TRUE(has_fragment(full.parameters(), ".fusion."));
  // The last hetero layers never update edges.
  EXPECT_FALSE(full.parameters().contains("community.layer1.rn.A"));
  EXPECT_TRUE(full.parameters().contains("community.layer0.rn.A"));

  const model::HenceModel no_od(variant(model::Ablation::no_od_link));
  EXPECT_FALSE(has_fragment(no_od.parameters(), ".od."));
  EXPECT_FALSE(has_prefix(no_od.parameters(), "community.od_embed"));
  EXPECT_FALSE(has_fragment(no_od.parameters(), ".fusion."));

  const model::HenceModel no_rn(variant(model::Ablation::no_spatial_link));
  EXPECT_FALSE(has_fragment(no_rn.parameters(), ".rn."));

  const model::HenceModel no_cl(variant(model::Ablation::no_community_level));
  EXPECT_FALSE(has_prefix(no_cl.parameters(), "community."));
  EXPECT_FALSE(no_cl.parameters().contains("road.layer1.A"));

  const model::HenceModel no_rl(variant(model::Ablation::no_region_level));
  EXPECT_FALSE(has_prefix(no_rl.parameters(), "region."));
  EXPECT_FALSE(has_prefix(no_rl.parameters(), "final_fusion"));
  EXPECT_LT(params(model::Ablation::no_region_level), params(model::Ablation::none));
}

TEST(Model, SameSeedSameParameters) {
  const model::HenceModel a(small_config());
  const model::HenceModel b(small_config());
  EXPECT_EQ(a.parameters().snapshot(), b.parameters().snapshot());
  const model::HenceModel c(small_config(8, 4));
  EXPECT_NE(a.parameters().snapshot(), c.parameters().snapshot());
}

TEST(Model, SetAblationRebuildsUntilTrained) {
  model::HenceModel m(small_config());
  m.set_ablation(model::Ablation::no_od_link);
  EXPECT_EQ(m.config().ablation, model::Ablation::no_od_link);
  EXPECT_FALSE(has_fragment(m.parameters(), ".od."));
  m.mark_trained();
  EXPECT_THROW(m.set_ablation(model::Ablation::none), std::logic_error);
}

TEST(Model, PreparedDataMustMatchTheModel) {
  const auto w = make_world(small_world(4, 1), variant(model::Ablation::none));
  const model::HenceModel m(variant(model::Ablation::no_od_link));
  EXPECT_THROW((void)m.intra_region_representation(w.prepared, 0), std::invalid_argument);
}

TEST(Model, EveryParameterReceivesGradient) {
  const auto c = small_config();
  const auto w = make_world(small_world(9, 3), c);
  model::HenceModel m(c);
  const auto cache = model::refresh_region_cache(m, w.prepared, 0);
  m.parameters().zero_grad();
  std::vector<double> targets;
  for (const auto& pr : w.prepared.regions) targets.push_back(w.prepared.labels.at(pr.region_id));
  ad::backward(ad::mse_loss(m.predict(w.prepared, all_positions(w.prepared), &cache), ad::Tensor::column(targets)));
  for (const auto& p : m.parameters().all()) {
    double norm = 0.0;
    for (double g : p.tensor.grad()) norm += g * g;
    EXPECT_GT(norm, 0.0) << p.name;
  }
}

TEST(Model, GradientsMatchFiniteDifferences) {
  auto c = small_config(4);
  c.layers = 2;
  c.road_layers = 2;
  const auto w = make_world(small_world(2, 5, 4, 2), c);
  model::HenceModel m(c);
  const auto cache = model::refresh_region_cache(m, w.prepared, 0);
  std::vector<double> targets;
  for (const auto& pr : w.prepared.regions) targets.push_back(w.prepared.labels.at(pr.region_id));
  const auto f = [&] {
    return ad::mse_loss(m.predict(w.prepared, all_positions(w.prepared), &cache), ad::Tensor::column(targets));
  };
  const auto rep = ad::finite_difference_check(f, m.parameters().all());
  EXPECT_LT(rep.max_rel_error, 1e-4) << rep.worst_parameter << "[" << rep.worst_index << "] analytic "
                                     << rep.worst_analytic << " numeric " << rep.worst_numeric;
}

TEST(RegionCache, DeterministicAndThreadIndependent) {
  const auto c = small_config();
  const auto w = make_world(small_world(9, 2), c);
  const model::HenceModel m(c);
  const auto a = model::refresh_region_cache(m, w.prepared, 0);
  const auto b = model::refresh_region_cache(m, w.prepared, 1);
  const auto threaded = model::refresh_region_cache(m, w.prepared, 0, 3);
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  EXPECT_EQ(a.fingerprint(), threaded.fingerprint());
  EXPECT_EQ(a.intra.size(), w.prepared.size());
  EXPECT_THROW((void)a.row(w.prepared.size()), std::out_of_range);
}

TEST(RegionCache, EntriesCarryNoHistory) {
  const auto c = small_config();
  const auto w = make_world(small_world(4, 2), c);
  model::HenceModel m(c);
  const auto cache = model::refresh_region_cache(m, w.prepared, 0);
  for (const auto& row : cache.intra) {
    EXPECT_TRUE(row.is_leaf());
    EXPECT_FALSE(row.requires_grad());
  }
  // Gradient from one target reaches the parameters but not the cache.
  m.parameters().zero_grad();
  ad::backward(ad::sum(m.predict_region(w.prepared, 0, &cache)));
  for (const auto& row : cache.intra)
    for (double g : row.grad()) EXPECT_EQ(g, 0.0);
}

TEST(RegionCache, ChangesWhenParametersChange) {
  const auto c = small_config();
  const auto w = make_world(small_world(4, 2), c);
  model::HenceModel m(c);
  const auto before = model::refresh_region_cache(m, w.prepared, 0).fingerprint();
  m.parameters().all()[0].tensor.mutable_values()[0] += 0.5;
  EXPECT_NE(model::refresh_region_cache(m, w.prepared, 0).fingerprint(), before);
}

TEST(InterRegion, PrunedMatchesFullGraph) {
  const auto c = small_config();
  const auto w = make_world(small_world(16, 4), c);
  const model::HenceModel m(c);
  const auto cache = model::refresh_region_cache(m, w.prepared, 0);
  for (std::size_t r = 0; r < w.prepared.size(); ++r) {
    const auto live = m.intra_region_representation(w.prepared, r);
    const auto pruned = vec(m.inter_region_representation(w.prepared, r, live, cache, nullptr, true));
    const auto full = vec(m.inter_region_representation(w.prepared, r, live, cache, nullptr, false));
    for (std::size_t k = 0; k < full.size(); ++k) EXPECT_NEAR(pruned[k], full[k], 1e-12) << "region " << r;
  }
}

TEST(InterRegion, FarRegionsDoNotMatter) {
  // 4x4 region grid, two layers: the corner (0,0) sees king neighbors up to two
  // steps away, so the opposite corner (3,3) cannot influence it.
  const auto c = variant(model::Ablation::none);
  const auto w = make_world(small_world(16, 4), c);
  const model::HenceModel m(c);
  auto cache = model::refresh_region_cache(m, w.prepared, 0);
  const auto live = m.intra_region_representation(w.prepared, 0);
  const auto base = vec(m.inter_region_representation(w.prepared, 0, live, cache));
  cache.intra[15] = ad::Tensor::filled(cache.intra[15].shape(), 3.0);
  EXPECT_EQ(vec(m.inter_region_representation(w.prepared, 0, live, cache)), base);
  cache.intra[5] = ad::Tensor::filled(cache.intra[5].shape(), 3.0);
  EXPECT_NE(vec(m.inter_region_representation(w.prepared, 0, live, cache)), base);
}

TEST(InterRegion, IsolatedRegionIgnoresTheCache) {
  const auto c = small_config();
  auto ds = data::generate_synthetic(small_world(4, 4));
  ds.region_adjacency.clear();
  std::erase_if(ds.od, [](const data::ODFlow& f) { return f.level == hence::graph::Level::region; });
  const auto n = model::Normalizer::fit(ds, ds.region_ids());
  const auto prepared = model::prepare(ds, n, c);
  const model::HenceModel m(c);
  auto cache = model::refresh_region_cache(m, prepared, 0);
  const auto before = vec(m.predict_region(prepared, 1, &cache));
  for (auto& row : cache.intra) row = ad::Tensor::filled(row.shape(), -2.0);
  EXPECT_EQ(vec(m.predict_region(prepared, 1, &cache)), before);
}

TEST(InterRegion, GradientReachesRegionParametersThroughTheLiveRow) {
  const auto c = small_config();
  const auto w = make_world(small_world(4, 4), c);
  model::HenceModel m(c);
  const auto cache = model::refresh_region_cache(m, w.prepared, 0);
  m.parameters().zero_grad();
  ad::backward(ad::sum(m.predict_region(w.prepared, 0, &cache)));
  double road = 0.0;
  for (double g : m.parameters().at("road.layer0.W").tensor.grad()) road += std::abs(g);
  EXPECT_GT(road, 0.0);
}

TEST(Ablation, NoOdLinkIgnoresFlows) {
  const auto c = variant(model::Ablation::no_od_link);
  auto ds = data::generate_synthetic(small_world(6, 8));
  const auto n = model::Normalizer::fit(ds, ds.region_ids());
  const model::HenceModel m(c);
  const auto base = predictions(m, model::prepare(ds, n, c));
  std::mt19937_64 rng(1);
  std::vector<double> flows;
  for (const auto& f : ds.od) flows.push_back(f.flow);
  std::shuffle(flows.begin(), flows.end(), rng);
  for (std::size_t i = 0; i < flows.size(); ++i) ds.od[i].flow = flows[i] * 3.0;
  EXPECT_EQ(predictions(m, model::prepare(ds, n, c)), base);
}

TEST(Ablation, FullModelSeesFlows) {
  const auto c = variant(model::Ablation::none);
  auto ds = data::generate_synthetic(small_world(6, 8));
  const auto n = model::Normalizer::fit(ds, ds.region_ids());
  const model::HenceModel m(c);
  const auto base = predictions(m, model::prepare(ds, n, c));
  for (auto& f : ds.od) f.flow *= 3.0;
  EXPECT_NE(predictions(m, model::prepare(ds, n, c)), base);
}

TEST(Ablation, NoCommunityLevelIgnoresCommunityFlows) {
  const auto c = variant(model::Ablation::no_community_level);
  auto ds = data::generate_synthetic(small_world(6, 8));
  const auto n = model::Normalizer::fit(ds, ds.region_ids());
  const model::HenceModel m(c);
  const auto base = predictions(m, model::prepare(ds, n, c));
  for (auto& f : ds.od)
    if (f.level == hence::graph::Level::community) f.flow *= 5.0;
  EXPECT_EQ(predictions(m, model::prepare(ds, n, c)), base);
}

TEST(Ablation, NoRegionLevelNeedsNoCacheAndIgnoresRegionFlows) {
  const auto c = variant(model::Ablation::no_region_level);
  auto ds = data::generate_synthetic(small_world(6, 8));
  const auto n = model::Normalizer::fit(ds, ds.region_ids());
  const auto prepared = model::prepare(ds, n, c);
  EXPECT_TRUE(prepared.views.empty());
  const model::HenceModel m(c);
  const auto base = predictions(m, prepared);
  EXPECT_NO_THROW((void)m.predict_region(prepared, 0, nullptr));
  for (auto& f : ds.od)
    if (f.level == hence::graph::Level::region) f.flow *= 5.0;
  EXPECT_EQ(predictions(m, model::prepare(ds, n, c)), base);
}

TEST(Ablation, NoSpatialLinkDropsSpatialArcs) {
  const auto c = variant(model::Ablation::no_spatial_link);
  const auto w = make_world(small_world(6, 8), c);
  EXPECT_EQ(w.prepared.region_graph.spatial.size(), 0u);
  for (const auto& v : w.prepared.views) EXPECT_TRUE(v.spatial_arcs.empty());
  const model::HenceModel m(c);
  for (double p : predictions(m, w.prepared)) EXPECT_TRUE(std::isfinite(p));
}

TEST(Invariance, RelabelingNodesAndCommunitiesKeepsPredictions) {
  const auto c = small_config();
  const model::HenceModel m(c);
  std::mt19937_64 rng(12);
  const auto ds = data::generate_synthetic(small_world(6, 3, 4, 4));
  const auto n = model::Normalizer::fit(ds, ds.region_ids());
  const auto base = predictions(m, model::prepare(ds, n, c));
  const auto moved = hence::testing::relabel(ds, rng);
  ASSERT_FALSE(moved == ds);
  const auto after = predictions(m, model::prepare(moved, model::Normalizer::fit(moved, moved.region_ids()), c));
  for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(after[i], base[i], 1e-9);
}

TEST(Metrics, HandExamples) {
  const std::vector<double> y = {0, 2};
  const std::vector<double> flat = {1, 1};
  const auto m = model::compute_metrics(y, flat);
  EXPECT_DOUBLE_EQ(m.r2, 0.0);
  EXPECT_DOUBLE_EQ(m.mae, 1.0);
  EXPECT_DOUBLE_EQ(m.rmse, 1.0);
  const auto perfect = model::compute_metrics(y, y);
  EXPECT_EQ(perfect.r2, 1.0);
  EXPECT_EQ(perfect.mae, 0.0);
  EXPECT_EQ(perfect.rmse, 0.0);
  const std::vector<double> y3 = {1, 2, 6};
  const std::vector<double> mean3 = {3, 3, 3};
  EXPECT_EQ(model::compute_metrics(y3, mean3).r2, 0.0);
}

TEST(Metrics, RmseSquaredIsMeanSquaredError) {
  const std::vector<double> y = {0.5, -1, 2, 4};
  const std::vector<double> p = {1, -1.5, 2.5, 3};
  const auto m = model::compute_metrics(y, p);
  EXPECT_NEAR(m.rmse * m.rmse, (0.25 + 0.25 + 0.25 + 1.0) / 4.0, 1e-15);
  EXPECT_GE(m.rmse, m.mae);
}

TEST(Metrics, ConstantTargetAndBadInput) {
  const std::vector<double> y = {2, 2};
  const std::vector<double> p = {1, 3};
  EXPECT_TRUE(std::isnan(model::compute_metrics(y, p).r2));
  EXPECT_THROW((void)model::compute_metrics(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW((void)model::compute_metrics(y, std::vector<double>{1}), std::invalid_argument);
}

TEST(Trainer, LossDecreasesAndRunsAreReproducible) {
  const auto c = small_config();
  const auto w = make_world(small_world(12, 6), c);
  const auto split = data::split_ids(w.dataset.labeled_region_ids(), {0.5, 0.25, 0.25}, 1);
  model::TrainConfig tc;
  tc.epochs = 6;
  tc.batch = 4;
  tc.lr = 1e-2;
  tc.patience = 100;
  model::HenceModel a(c);
  model::HenceModel b(c);
  const auto ra = model::train(a, w.prepared, split.train, split.val, tc);
  const auto rb = model::train(b, w.prepared, split.train, split.val, tc);
  ASSERT_EQ(ra.log.size(), 6u);
  EXPECT_LT(ra.log.back().train_loss, ra.log.front().train_loss);
  for (std::size_t e = 0; e < ra.log.size(); ++e) {
    EXPECT_EQ(ra.log[e].train_loss, rb.log[e].train_loss);
    EXPECT_EQ(ra.log[e].val->r2, rb.log[e].val->r2);
  }
  EXPECT_EQ(a.parameters().snapshot(), b.parameters().snapshot());
  EXPECT_TRUE(a.trained());
}

TEST(Trainer, OneRefreshPerEpochAndConstantCacheWithin) {
  const auto c = small_config();
  const auto w = make_world(small_world(12, 6), c);
  const auto split = data::split_ids(w.dataset.labeled_region_ids(), {0.5, 0.25, 0.25}, 1);
  model::TrainConfig tc;
  tc.epochs = 4;
  tc.batch = 2;
  std::vector<std::size_t> refreshed;
  std::map<std::size_t, std::set<std::uint64_t>> seen;
  std::size_t steps = 0;
  model::TrainHooks hooks;
  hooks.on_cache_refresh = [&](std::size_t epoch, const model::RegionCache&) { refreshed.push_back(epoch); };
  hooks.on_step = [&](std::size_t epoch, std::size_t, const model::RegionCache* cache) {
    ASSERT_NE(cache, nullptr);
    seen[epoch].insert(cache->fingerprint());
    ++steps;
  };
  model::HenceModel m(c);
  const auto r = model::train(m, w.prepared, split.train, split.val, tc, hooks);
  EXPECT_EQ(refreshed, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(r.cache_refreshes, 4u);
  EXPECT_EQ(steps, r.steps);
  for (const auto& [epoch, prints] : seen) EXPECT_EQ(prints.size(), 1u) << "epoch " << epoch;
  EXPECT_NE(*seen[0].begin(), *seen[1].begin());
  for (const auto& e : r.log) EXPECT_EQ(e.cache_refreshes, 1u);
}

TEST(Trainer, NoRegionLevelNeverRefreshes) {
  const auto c = variant(model::Ablation::no_region_level);
  const auto w = make_world(small_world(12, 6), c);
  const auto split = data::split_ids(w.dataset.labeled_region_ids(), {0.5, 0.25, 0.25}, 1);
  model::TrainConfig tc;
  tc.epochs = 2;
  tc.batch = 4;
  model::HenceModel m(c);
  const auto r = model::train(m, w.prepared, split.train, split.val, tc);
  EXPECT_EQ(r.cache_refreshes, 0u);
}

TEST(Trainer, StopsEarlyWithoutImprovement) {
  const auto c = small_config();
  const auto w = make_world(small_world(12, 6), c);
  const auto split = data::split_ids(w.dataset.labeled_region_ids(), {0.5, 0.25, 0.25}, 1);
  model::TrainConfig tc;
  tc.epochs = 50;
  tc.patience = 2;
  tc.lr = 1e-4;
  model::HenceModel m(c);
  const auto r = model::train(m, w.prepared, split.train, split.val, tc);
  ASSERT_TRUE(r.best_epoch.has_value());
  if (r.early_stopped) EXPECT_EQ(r.log.size(), *r.best_epoch + 3);
  EXPECT_THROW((void)model::train(m, w.prepared, {}, split.val, tc), std::invalid_argument);
}

TEST(Trainer, MaxStepsBoundsTheRun) {
  const auto c = small_config();
  const auto w = make_world(small_world(12, 6), c);
  const auto ids = w.dataset.labeled_region_ids();
  model::TrainConfig tc;
  tc.epochs = 100;
  tc.batch = 2;
  tc.max_steps = 7;
  model::HenceModel m(c);
  EXPECT_EQ(model::train(m, w.prepared, ids, {}, tc).steps, 7u);
}

TEST(Trainer, StopsOnceTrainingMseIsLowEnough) {
  const auto c = small_config();
  const auto w = make_world(small_world(12, 6), c);
  const auto ids = w.dataset.labeled_region_ids();
  model::TrainConfig tc;
  tc.epochs = 200;
  tc.batch = 4;
  tc.lr = 1e-2;
  tc.stop_below_loss = 0.3;
  model::HenceModel m(c);
  const auto r = model::train(m, w.prepared, ids, {}, tc);
  ASSERT_TRUE(r.log.back().train_mse.has_value());
  EXPECT_LT(*r.log.back().train_mse, 0.3);
  for (std::size_t e = 0; e + 1 < r.log.size(); ++e) EXPECT_GE(*r.log[e].train_mse, 0.3);
  const double rmse = model::evaluate(m, w.prepared, ids).normalized.rmse;
  EXPECT_NEAR(rmse * rmse, *r.log.back().train_mse, 1e-12);
}

TEST(Checkpoint, RoundTripKeepsPredictions) {
  const auto c = small_config();
  const auto w = make_world(small_world(5, 2), c);
  model::HenceModel m(c);
  m.parameters().all()[1].tensor.mutable_values()[0] = 0.123456789012345;
  const auto j = model::checkpoint_json(m, w.normalizer);
  EXPECT_EQ(j.at("format"), model::kCheckpointFormat);
  const auto loaded = model::checkpoint_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_TRUE(loaded.normalizer == w.normalizer);
  EXPECT_TRUE(loaded.model.config() == c);
  EXPECT_EQ(loaded.model.parameters().snapshot(), m.parameters().snapshot());
  EXPECT_EQ(predictions(loaded.model, w.prepared), predictions(m, w.prepared));
}

TEST(Checkpoint, RejectsTamperedArchives) {
  const auto c = small_config();
  const auto w = make_world(small_world(3, 2), c);
  const model::HenceModel m(c);
  auto j = model::checkpoint_json(m, w.normalizer);
  auto bad_format = j;
  bad_format["format"] = "other";
  EXPECT_THROW((void)model::checkpoint_from_json(bad_format), std::runtime_error);
  auto missing = j;
  missing["params"].erase(missing["params"].begin());
  EXPECT_THROW((void)model::checkpoint_from_json(missing), std::runtime_error);
}
