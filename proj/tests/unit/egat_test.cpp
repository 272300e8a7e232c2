#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "hence/autodiff/gradcheck.hpp"
#include "hence/autodiff/ops.hpp"
#include "hence/egat/egat_layer.hpp"
#include "hence/egat/fusion.hpp"
#include "hence/egat/hetero_layer.hpp"
#include "egat_reference.hpp"
#include "hence/error.hpp"
#include "test_support.hpp"

namespace ad = hence::ad;
namespace egat = hence::egat;
namespace graph = hence::graph;
using hence::testing::dense_egat;
using hence::testing::max_abs_diff;
using hence::testing::random_arcs;
using hence::testing::random_hetero;
using hence::testing::random_tensor;
using hence::testing::segment_totals;
using hence::testing::to_matrix;

namespace {

egat::EgatParams random_params(ad::ParameterSet& params, egat::EgatDims dims, std::mt19937_64& rng,
                               bool edge_update = true) {
  return egat::make_egat_params(params, "layer", dims, edge_update, rng);
}

}  // namespace

TEST(EgatLayer, MatchesDenseReferenceOnRandomGraphs) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    const egat::EgatDims dims{3, 2, 4, 3, 5};
    ad::ParameterSet params;
    const auto p = random_params(params, dims, rng);
    const auto arcs = random_arcs(n, 0.4, rng);
    const auto v = random_tensor({n, dims.node_in}, rng);
    const auto e = random_tensor({arcs.size(), dims.edge_in}, rng);
    const auto got = egat::egat_layer(v, e, arcs, p);
    const auto ref = dense_egat(to_matrix(v), to_matrix(e), arcs, to_matrix(p.W), to_matrix(p.U), to_matrix(p.a),
                                to_matrix(p.A), ad::kLeakySlope);
    EXPECT_LT(max_abs_diff(ref.nodes, got.nodes), 1e-10) << "trial " << trial;
    EXPECT_LT(max_abs_diff(ref.edges, got.edges), 1e-10) << "trial " << trial;
  }
}

TEST(EgatLayer, AttentionSumsToOnePerDestination) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng() % 10;
    ad::ParameterSet params;
    const auto p = random_params(params, {2, 2, 2, 2, 2}, rng);
    const auto arcs = random_arcs(n, 0.5, rng);
    const auto out = egat::egat_layer(random_tensor({n, 2}, rng, false, 3.0), random_tensor({arcs.size(), 2}, rng),
                                      arcs, p);
    ASSERT_EQ(out.alpha.rows(), arcs.size() + n);
    for (double t : segment_totals(out.alpha, out.alpha_dst, n)) EXPECT_NEAR(t, 1.0, 1e-12);
  }
}

TEST(EgatLayer, IsolatedNodeKeepsItsTransformedSignal) {
  std::mt19937_64 rng(8);
  ad::ParameterSet params;
  const auto p = random_params(params, {2, 1, 3, 1, 2}, rng);
  const auto v = random_tensor({2, 2}, rng);
  const auto out = egat::egat_layer(v, ad::Tensor::zeros({0, 1}), {}, p);
  const auto expected = ad::matmul(v, p.W);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(out.nodes.at(r, c), expected.at(r, c), 1e-14);
}

TEST(EgatLayer, PermutationEquivariant) {
  std::mt19937_64 rng(21);
  const std::size_t n = 8;
  ad::ParameterSet params;
  const auto p = random_params(params, {3, 2, 3, 2, 4}, rng);
  const auto arcs = random_arcs(n, 0.4, rng);
  const auto v = random_tensor({n, 3}, rng);
  const auto e = random_tensor({arcs.size(), 2}, rng);
  std::vector<std::size_t> perm(n);  // new index of old node
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> inverse(n);
  for (std::size_t i = 0; i < n; ++i) inverse[perm[i]] = i;
  std::vector<graph::Arc> parcs;
  for (const auto& a : arcs) parcs.push_back({perm[a.src], perm[a.dst]});
  const auto base = egat::egat_layer(v, e, arcs, p);
  const auto moved = egat::egat_layer(ad::gather_rows(v, inverse), e, parcs, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(base.nodes.at(i, c), moved.nodes.at(perm[i], c), 1e-12);
  for (std::size_t k = 0; k < arcs.size(); ++k)
    for (std::size_t c = 0; c < 2; ++c) EXPECT_NEAR(base.edges.at(k, c), moved.edges.at(k, c), 1e-12);
}

TEST(EgatLayer, EdgeRowsSelectUpdatedArcs) {
  std::mt19937_64 rng(4);
  ad::ParameterSet params;
  const auto p = random_params(params, {2, 2, 2, 3, 2}, rng);
  const auto arcs = random_arcs(5, 0.5, rng);
  ASSERT_GE(arcs.size(), 3u);
  const auto v = random_tensor({5, 2}, rng);
  const auto e = random_tensor({arcs.size(), 2}, rng);
  const auto full = egat::egat_layer(v, e, arcs, p);
  egat::EgatOptions opt;
  opt.edge_rows = std::vector<std::size_t>{2, 0};
  const auto part = egat::egat_layer(v, e, arcs, p, opt);
  ASSERT_EQ(part.edges.rows(), 2u);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(part.edges.at(0, c), full.edges.at(2, c));
    EXPECT_EQ(part.edges.at(1, c), full.edges.at(0, c));
  }
}

TEST(EgatLayer, NoEdgeUpdateLeavesEdgesUndefined) {
  std::mt19937_64 rng(4);
  ad::ParameterSet params;
  const auto p = random_params(params, {2, 2, 2, 2, 2}, rng, false);
  EXPECT_FALSE(p.updates_edges());
  EXPECT_FALSE(params.contains("layer.A"));
  const auto out = egat::egat_layer(random_tensor({3, 2}, rng), random_tensor({1, 2}, rng),
                                    std::vector<graph::Arc>{{0, 1}}, p);
  EXPECT_FALSE(out.edges.defined());
}

TEST(EgatLayer, WrongFeatureWidthThrows) {
  std::mt19937_64 rng(4);
  ad::ParameterSet params;
  const auto p = random_params(params, {2, 2, 2, 2, 2}, rng);
  EXPECT_THROW((void)egat::egat_layer(random_tensor({3, 3}, rng), random_tensor({1, 2}, rng),
                                      std::vector<graph::Arc>{{0, 1}}, p),
               hence::DimensionError);
  EXPECT_THROW((void)egat::egat_layer(random_tensor({3, 2}, rng), random_tensor({2, 2}, rng),
                                      std::vector<graph::Arc>{{0, 1}}, p),
               hence::DimensionError);
}

TEST(EgatLayer, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(12);
  ad::ParameterSet params;
  const auto p = random_params(params, {3, 2, 3, 2, 3}, rng);
  const auto arcs = random_arcs(6, 0.4, rng);
  auto v = params.adopt("v", random_tensor({6, 3}, rng, true));
  auto e = params.adopt("e", random_tensor({arcs.size(), 2}, rng, true));
  const auto f = [&] {
    const auto out = egat::egat_layer(v, e, arcs, p);
    return ad::add(ad::sum(ad::tanh(out.nodes)), ad::sum(ad::tanh(out.edges)));
  };
  EXPECT_LT(ad::finite_difference_check(f, params.all()).max_rel_error, 1e-6);
}

TEST(EgatStack, ChainsNodeAndEdgeOutputs) {
  std::mt19937_64 rng(2);
  ad::ParameterSet params;
  std::vector<egat::EgatParams> layers = {
      egat::make_egat_params(params, "l0", {3, 2, 4, 5, 4}, true, rng),
      egat::make_egat_params(params, "l1", {4, 5, 4, 4, 4}, false, rng),
  };
  const auto arcs = random_arcs(5, 0.5, rng);
  const auto v = random_tensor({5, 3}, rng);
  const auto e = random_tensor({arcs.size(), 2}, rng);
  const auto out = egat::stack_egat(v, e, arcs, layers);
  const auto first = egat::egat_layer(v, e, arcs, layers[0]);
  const auto second = egat::egat_layer(first.nodes, first.edges, arcs, layers[1]);
  ASSERT_EQ(out.alphas.size(), 2u);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(out.nodes.at(i, c), second.nodes.at(i, c));
}

TEST(Fusion, HandComputedTwoInputExample) {
  ad::ParameterSet params;
  egat::FusionParams p;
  p.c = ad::Tensor::column({1.0});
  p.W = ad::Tensor::from({1, 1}, {1.0});
  p.b = ad::Tensor::scalar(0.0);
  const std::vector<ad::Tensor> in = {ad::Tensor::column({0.0}), ad::Tensor::column({2.0})};
  const auto out = egat::attention_fusion(in, p);
  const double s = std::tanh(2.0);
  const double beta1 = std::exp(s) / (1.0 + std::exp(s));
  EXPECT_NEAR(out.beta.at(0, 0), 1.0 - beta1, 1e-15);
  EXPECT_NEAR(out.beta.at(0, 1), beta1, 1e-15);
  EXPECT_NEAR(out.fused.item(), 2.0 * beta1, 1e-15);
}

TEST(Fusion, IdenticalInputsGiveEqualWeights) {
  std::mt19937_64 rng(9);
  ad::ParameterSet params;
  const auto p = egat::make_fusion_params(params, "f", 4, rng);
  const auto x = random_tensor({3, 4}, rng);
  const std::vector<ad::Tensor> in = {x, x};
  const auto out = egat::attention_fusion(in, p);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_NEAR(out.beta.at(r, 0), 0.5, 1e-15);
}

TEST(Fusion, RejectsMismatchedInputs) {
  std::mt19937_64 rng(9);
  ad::ParameterSet params;
  const auto p = egat::make_fusion_params(params, "f", 2, rng);
  const std::vector<ad::Tensor> one = {ad::Tensor::zeros({1, 2})};
  EXPECT_THROW((void)egat::attention_fusion(one, p), std::invalid_argument);
  const std::vector<ad::Tensor> bad = {ad::Tensor::zeros({1, 2}), ad::Tensor::zeros({1, 3})};
  EXPECT_THROW((void)egat::attention_fusion(bad, p), hence::DimensionError);
}

TEST(HeteroLayer, BetaRowsSumToOne) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    ad::ParameterSet params;
    const auto h = random_hetero(2 + rng() % 8, 1, rng, params);
    const auto out = egat::hetero_layer(h.g.node_feats, h.g.spatial.arcs, h.g.spatial.feats, h.g.od.arcs,
                                        h.g.od.feats, h.layers[0]);
    for (std::size_t r = 0; r < out.beta.rows(); ++r)
      EXPECT_NEAR(out.beta.at(r, 0) + out.beta.at(r, 1), 1.0, 1e-12);
  }
}

TEST(HeteroLayer, FusesPerTypeOutputs) {
  std::mt19937_64 rng(6);
  ad::ParameterSet params;
  const auto h = random_hetero(6, 1, rng, params);
  const auto& lp = h.layers[0];
  const auto out = egat::hetero_layer(h.g.node_feats, h.g.spatial.arcs, h.g.spatial.feats, h.g.od.arcs, h.g.od.feats,
                                      lp);
  const auto rn = egat::egat_layer(h.g.node_feats, h.g.spatial.feats, h.g.spatial.arcs, *lp.spatial);
  const auto od = egat::egat_layer(h.g.node_feats, h.g.od.feats, h.g.od.arcs, *lp.od);
  const std::vector<ad::Tensor> in = {rn.nodes, od.nodes};
  const auto fused = egat::attention_fusion(in, *lp.fusion);
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(out.nodes.at(r, c), fused.fused.at(r, c), 1e-15);
}

TEST(HeteroLayer, LoneTypeGetsFullWeight) {
  std::mt19937_64 rng(6);
  ad::ParameterSet params;
  auto h = random_hetero(5, 1, rng, params);
  egat::HeteroLayerParams only_od;
  only_od.od = h.layers[0].od;
  const auto out = egat::hetero_layer(h.g.node_feats, {}, ad::Tensor(), h.g.od.arcs, h.g.od.feats, only_od);
  const auto od = egat::egat_layer(h.g.node_feats, h.g.od.feats, h.g.od.arcs, *only_od.od);
  for (std::size_t r = 0; r < 5; ++r) {
    EXPECT_EQ(out.beta.at(r, egat::kOdColumn), 1.0);
    EXPECT_EQ(out.beta.at(r, egat::kSpatialColumn), 0.0);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(out.nodes.at(r, c), od.nodes.at(r, c));
  }
}

TEST(HeteroLayer, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(40);
  ad::ParameterSet params;
  const auto h = random_hetero(5, 1, rng, params, 0.5);
  const auto f = [&] {
    const auto out = egat::hetero_layer(h.g.node_feats, h.g.spatial.arcs, h.g.spatial.feats, h.g.od.arcs,
                                        h.g.od.feats, h.layers[0]);
    return ad::sum(ad::tanh(out.nodes));
  };
  const auto report = ad::finite_difference_check(f, params.all());
  EXPECT_LT(report.max_rel_error, 1e-4) << report.worst_parameter << "[" << report.worst_index << "]";
}

TEST(ReceptiveField, PathGraphHopsAndPlan) {
  // 0 -> 1 -> 2 -> 3 -> 4 as OD arcs, no spatial arcs.
  std::vector<graph::Arc> od;
  for (std::size_t i = 0; i + 1 < 5; ++i) od.push_back({i, i + 1});
  const auto hops = egat::hops_to_target(5, {}, od, 4);
  EXPECT_EQ(hops[4], 0u);
  EXPECT_EQ(hops[3], 1u);
  EXPECT_EQ(hops[0], 4u);
  const auto back = egat::hops_to_target(5, {}, od, 0);
  EXPECT_EQ(back[1], std::numeric_limits<std::size_t>::max());
  const auto plan = egat::plan_receptive_field(5, {}, od, 4, 2);
  ASSERT_EQ(plan.od.size(), 2u);
  // Layer 0 feeds nodes within one hop (3, 4): arcs into 3 and 4.
  EXPECT_EQ(plan.od[0], (std::vector<std::size_t>{2, 3}));
  // Layer 1 only needs arcs into the target.
  EXPECT_EQ(plan.od[1], (std::vector<std::size_t>{3}));
}

TEST(ReceptiveField, NodesBeyondLHopsDoNotAffectTarget) {
  std::vector<graph::Arc> od;
  for (std::size_t i = 0; i + 1 < 6; ++i) od.push_back({i, i + 1});
  std::mt19937_64 rng(1);
  ad::ParameterSet params;
  std::vector<egat::HeteroLayerParams> layers(2);
  for (std::size_t l = 0; l < 2; ++l)
    layers[l].od = egat::make_egat_params(params, "od" + std::to_string(l), {2, l == 0 ? 1 : 2, 2, 2, 2}, l == 0, rng);
  graph::HeteroGraph g;
  g.node_feats = random_tensor({6, 2}, rng);
  g.od.arcs = od;
  g.od.feats = random_tensor({od.size(), 1}, rng);
  const auto base = egat::stack_hetero(g, layers).nodes;
  auto far = g;
  far.node_feats = g.node_feats.detach();
  auto values = far.node_feats.mutable_values();
  values[0] += 5.0;  // node 0 sits 5 hops from node 5
  values[2 * 2] += 5.0;  // node 2 sits 3 hops away
  const auto moved = egat::stack_hetero(far, layers).nodes;
  for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(base.at(5, c), moved.at(5, c));
  far.node_feats.mutable_values()[3 * 2] += 5.0;  // node 3 is within 2 hops
  const auto near = egat::stack_hetero(far, layers).nodes;
  EXPECT_NE(base.at(5, 0), near.at(5, 0));
}

TEST(ReceptiveField, PlannedStackMatchesFullStackAtTarget) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    ad::ParameterSet params;
    const std::size_t n = 4 + rng() % 9;
    const auto h = random_hetero(n, 3, rng, params, 0.25);
    const std::size_t target = rng() % n;
    const auto plan = egat::plan_receptive_field(n, h.g.spatial.arcs, h.g.od.arcs, target, 3);
    const auto full = egat::stack_hetero(h.g, h.layers).nodes;
    const auto pruned = egat::stack_hetero(h.g, h.layers, &plan).nodes;
    for (std::size_t c = 0; c < full.cols(); ++c) EXPECT_NEAR(full.at(target, c), pruned.at(target, c), 1e-12);
  }
}
