#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hence/autodiff/adam.hpp"
#include "hence/autodiff/gradcheck.hpp"
#include "hence/autodiff/ops.hpp"
#include "hence/autodiff/parameter.hpp"
#include "hence/error.hpp"
#include "test_support.hpp"

namespace ad = hence::ad;
using hence::testing::random_tensor;

namespace {

std::vector<double> vec(const ad::Tensor& t) { return {t.values().begin(), t.values().end()}; }

/// Gradient check of a scalar function of freshly registered inputs.
double check(ad::ParameterSet& params, const ad::ScalarFn& f, double h = 1e-5) {
  return ad::finite_difference_check(f, params.all(), h).max_rel_error;
}

}  // namespace

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  const auto eye = ad::Tensor::from({2, 2}, {1, 0, 0, 1});
  const auto m = ad::Tensor::from({2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(vec(ad::matmul(eye, m)), (std::vector<double>{1, 2, 3, 4}));
}

TEST(Matmul, RowTimesColumn) {
  EXPECT_EQ(ad::matmul(ad::Tensor::row({1, 2}), ad::Tensor::column({3, 4})).item(), 11.0);
}

TEST(Matmul, ShapeMismatchNamesBothShapes) {
  try {
    (void)ad::matmul(ad::Tensor::zeros({2, 3}), ad::Tensor::zeros({2, 3}));
    FAIL();
  } catch (const hence::DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
  }
}

TEST(Matmul, GradientOfSumMatchesFiniteDifferences) {
  std::mt19937_64 rng(1);
  ad::ParameterSet params;
  auto a = params.adopt("a", random_tensor({3, 4}, rng, true));
  auto b = params.adopt("b", random_tensor({4, 2}, rng, true));
  EXPECT_LT(check(params, [&] { return ad::sum(ad::matmul(a, b)); }), 1e-6);
}

TEST(Matmul, EmptyRowsAreSupported) {
  const auto out = ad::matmul(ad::Tensor::zeros({0, 1}), ad::Tensor::filled({1, 3}, 2.0));
  EXPECT_EQ(out.rows(), 0u);
  EXPECT_EQ(out.cols(), 3u);
}

TEST(Concat, PlacesColumnsInArgumentOrder) {
  const auto out = ad::concat_columns({ad::Tensor::scalar(1), ad::Tensor::scalar(2), ad::Tensor::scalar(3)});
  EXPECT_EQ(out.shape(), (ad::Shape{1, 3}));
  EXPECT_EQ(vec(out), (std::vector<double>{1, 2, 3}));
}

TEST(Concat, SingleArgumentIsUnchanged) {
  const auto x = ad::Tensor::from({2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(vec(ad::concat_columns({x})), vec(x));
}

TEST(Concat, BackwardOfSumGivesOnes) {
  auto a = ad::Tensor::zeros({2, 2}, true);
  auto b = ad::Tensor::zeros({2, 3}, true);
  ad::backward(ad::sum(ad::concat_columns({a, b})));
  EXPECT_EQ(std::vector<double>(a.grad().begin(), a.grad().end()), std::vector<double>(4, 1.0));
  EXPECT_EQ(std::vector<double>(b.grad().begin(), b.grad().end()), std::vector<double>(6, 1.0));
}

TEST(Concat, RowCountMismatchThrows) {
  EXPECT_THROW((void)ad::concat_columns({ad::Tensor::zeros({2, 1}), ad::Tensor::zeros({3, 1})}),
               hence::DimensionError);
}

TEST(Activation, LeakyReluSlope) {
  EXPECT_EQ(vec(ad::leaky_relu(ad::Tensor::row({-1, 0, 2}), 0.2)), (std::vector<double>{-0.2, 0, 2}));
}

TEST(Activation, LeakyReluDerivativeAtZeroIsOne) {
  auto x = ad::Tensor::scalar(0.0, true);
  ad::backward(ad::leaky_relu(x));
  EXPECT_EQ(x.grad()[0], 1.0);
}

TEST(Activation, TanhOfZero) { EXPECT_EQ(ad::tanh(ad::Tensor::scalar(0.0)).item(), 0.0); }

TEST(Activation, BothKindsPassGradientCheck) {
  std::mt19937_64 rng(2);
  ad::ParameterSet params;
  auto x = params.adopt("x", random_tensor({4, 5}, rng, true));
  EXPECT_LT(check(params, [&] { return ad::sum(ad::leaky_relu(x)); }), 1e-6);
  EXPECT_LT(check(params, [&] { return ad::sum(ad::tanh(x)); }), 1e-6);
}

TEST(SegmentSoftmax, EqualScoresSplitEvenly) {
  const std::vector<std::size_t> seg{0, 0};
  EXPECT_EQ(vec(ad::segment_softmax(ad::Tensor::column({0, 0}), seg)), (std::vector<double>{0.5, 0.5}));
}

TEST(SegmentSoftmax, AnalyticTwoThirds) {
  const std::vector<std::size_t> seg{0, 0};
  const auto out = vec(ad::segment_softmax(ad::Tensor::column({std::log(2.0), 0.0}), seg));
  EXPECT_NEAR(out[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(out[1], 1.0 / 3.0, 1e-15);
}

TEST(SegmentSoftmax, SingleElementIsOne) {
  const std::vector<std::size_t> seg{0};
  EXPECT_EQ(ad::segment_softmax(ad::Tensor::column({123.0}), seg).item(), 1.0);
}

TEST(SegmentSoftmax, EmptySegmentSpaceThrows) {
  const std::vector<std::size_t> seg;
  EXPECT_THROW((void)ad::segment_softmax(ad::Tensor::zeros({0, 1}), seg, 0), std::invalid_argument);
}

TEST(SegmentSoftmax, SegmentsSumToOneAndGradientsMatch) {
  std::mt19937_64 rng(3);
  std::vector<std::size_t> seg(40);
  std::uniform_int_distribution<std::size_t> pick(0, 6);
  for (auto& s : seg) s = pick(rng);
  for (std::size_t s = 0; s < 7; ++s) seg[s] = s;  // every segment non-empty
  ad::ParameterSet params;
  auto scores = params.adopt("s", random_tensor({40, 1}, rng, true));
  const auto out = ad::segment_softmax(scores, seg, 7);
  std::vector<double> sums(7, 0.0);
  for (std::size_t i = 0; i < seg.size(); ++i) sums[seg[i]] += out.at(i, 0);
  for (double s : sums) EXPECT_NEAR(s, 1.0, 1e-9);
  const auto w = random_tensor({40, 1}, rng);
  EXPECT_LT(check(params, [&] { return ad::sum(ad::mul_column(w, ad::segment_softmax(scores, seg, 7))); }), 1e-6);
}

TEST(SegmentSoftmax, LargeScoresDoNotOverflow) {
  const std::vector<std::size_t> seg{0, 0};
  const auto out = vec(ad::segment_softmax(ad::Tensor::column({1000.0, 1000.0}), seg));
  EXPECT_EQ(out[0], 0.5);
}

TEST(SegmentSum, GroupsRowsAndZeroFillsEmptySegments) {
  const std::vector<std::size_t> seg{0, 0, 1};
  EXPECT_EQ(vec(ad::segment_sum(ad::Tensor::column({1, 2, 3}), seg, 3)), (std::vector<double>{3, 3, 0}));
}

TEST(SegmentSum, OneSegmentIsColumnSum) {
  const std::vector<std::size_t> seg{0, 0};
  EXPECT_EQ(vec(ad::segment_sum(ad::Tensor::from({2, 2}, {1, 2, 3, 4}), seg, 1)), (std::vector<double>{4, 6}));
}

TEST(SegmentSum, IdOutOfRangeThrows) {
  const std::vector<std::size_t> seg{0, 5};
  EXPECT_THROW((void)ad::segment_sum(ad::Tensor::column({1, 2}), seg, 2), std::out_of_range);
}

TEST(SegmentSum, MeanMatchesGroupByOracle) {
  std::mt19937_64 rng(4);
  const std::size_t n = 50, d = 3, groups = 6;
  const auto x = random_tensor({n, d}, rng);
  std::vector<std::size_t> seg(n);
  std::uniform_int_distribution<std::size_t> pick(0, groups - 1);
  for (auto& s : seg) s = pick(rng);
  std::vector<double> counts(groups, 0.0);
  for (auto s : seg) counts[s] += 1.0;
  std::vector<double> inv(groups);
  for (std::size_t g = 0; g < groups; ++g) inv[g] = counts[g] > 0 ? 1.0 / counts[g] : 0.0;
  const auto mean = ad::scale_rows(ad::segment_sum(x, seg, groups), inv);
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t c = 0; c < d; ++c) {
      double acc = 0.0;
      double cnt = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (seg[i] == g) {
          acc += x.at(i, c);
          cnt += 1.0;
        }
      }
      EXPECT_NEAR(mean.at(g, c), cnt > 0 ? acc / cnt : 0.0, 1e-12);
    }
  }
}

TEST(MseLoss, Examples) {
  EXPECT_EQ(ad::mse_loss(ad::Tensor::column({1, 2}), ad::Tensor::column({1, 2})).item(), 0.0);
  EXPECT_EQ(ad::mse_loss(ad::Tensor::column({1, 1}), ad::Tensor::column({0, 2})).item(), 1.0);
}

TEST(MseLoss, EmptyBatchThrows) {
  EXPECT_THROW((void)ad::mse_loss(ad::Tensor::zeros({0, 1}), ad::Tensor::zeros({0, 1})), std::invalid_argument);
}

TEST(MseLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  ad::ParameterSet params;
  auto pred = params.adopt("pred", random_tensor({6, 1}, rng, true));
  const auto target = random_tensor({6, 1}, rng);
  EXPECT_LT(check(params, [&] { return ad::mse_loss(pred, target); }), 1e-8);
}

TEST(Backward, LinearScale) {
  auto x = ad::Tensor::scalar(3.0, true);
  ad::backward(ad::scale(x, 2.0));
  EXPECT_EQ(x.grad()[0], 2.0);
}

TEST(Backward, AccumulatesAcrossCalls) {
  auto x = ad::Tensor::scalar(3.0, true);
  const auto y = ad::scale(x, 2.0);
  ad::backward(y);
  ad::backward(y);
  EXPECT_EQ(x.grad()[0], 4.0);
}

TEST(Backward, NonScalarLossThrows) {
  auto x = ad::Tensor::zeros({2, 1}, true);
  EXPECT_THROW(ad::backward(ad::scale(x, 2.0)), std::invalid_argument);
}

TEST(Backward, VisitsEachNodeOnce) {
  // Diamond: y = x*2, z = y + y, loss = sum(z). Nodes: x, y, z, loss.
  auto x = ad::Tensor::scalar(1.0, true);
  const auto y = ad::scale(x, 2.0);
  const auto z = ad::add(y, y);
  const auto stats = ad::backward(ad::sum(z));
  EXPECT_EQ(stats.nodes_visited, 4u);
  EXPECT_EQ(x.grad()[0], 4.0);
}

TEST(Backward, NoGradGuardRecordsNothing) {
  auto x = ad::Tensor::scalar(1.0, true);
  ad::Tensor y;
  {
    const ad::NoGradGuard guard;
    y = ad::scale(x, 2.0);
  }
  EXPECT_TRUE(y.is_leaf());
  EXPECT_FALSE(y.requires_grad());
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ad::ParameterSet params;
  auto p = params.adopt("p", ad::Tensor::scalar(0.0, true));
  auto state = ad::make_adam_state(params, {0.1});
  p.mutable_grad()[0] = 1.0;
  ad::adam_step(params, state);
  EXPECT_NEAR(p.item(), -0.1, 1e-6);
  EXPECT_EQ(state.t, 1u);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  ad::ParameterSet params;
  auto p = params.adopt("p", ad::Tensor::row({1.5, -2.0}, true));
  auto state = ad::make_adam_state(params, {0.1});
  params.zero_grad();
  ad::adam_step(params, state);
  EXPECT_EQ(vec(p), (std::vector<double>{1.5, -2.0}));
}

TEST(Adam, ConvergesOnQuadratic) {
  ad::ParameterSet params;
  auto p = params.adopt("p", ad::Tensor::scalar(1.0, true));
  auto state = ad::make_adam_state(params, {0.05});
  std::size_t steps = 0;
  while (std::abs(p.item()) >= 1e-3 && steps < 500) {
    params.zero_grad();
    ad::backward(ad::matmul(p, p));
    ad::adam_step(params, state);
    ++steps;
  }
  EXPECT_LT(std::abs(p.item()), 1e-3);
  EXPECT_LE(steps, 500u);
}

TEST(Adam, MissingGradientNamesParameter) {
  ad::ParameterSet params;
  params.adopt("head.W1", ad::Tensor::scalar(1.0, true));
  auto state = ad::make_adam_state(params);
  try {
    ad::adam_step(params, state);
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("head.W1"), std::string::npos);
  }
}

TEST(Adam, DeterministicUpdate) {
  auto run = [] {
    std::mt19937_64 rng(6);
    ad::ParameterSet params;
    auto p = params.adopt("p", random_tensor({3, 3}, rng, true));
    auto state = ad::make_adam_state(params, {0.01});
    for (int i = 0; i < 3; ++i) {
      params.zero_grad();
      ad::backward(ad::sum(ad::tanh(p)));
      ad::adam_step(params, state);
    }
    return vec(p);
  };
  EXPECT_EQ(run(), run());
}

TEST(FiniteDifference, LinearFunctionHasNoError) {
  std::mt19937_64 rng(7);
  ad::ParameterSet params;
  auto p = params.adopt("p", random_tensor({2, 3}, rng, true));
  EXPECT_LT(check(params, [&] { return ad::sum(p); }), 1e-9);
}

TEST(FiniteDifference, DetectsCorruptedGradient) {
  std::mt19937_64 rng(8);
  ad::ParameterSet params;
  auto p = params.adopt("p", random_tensor({2, 2}, rng, true));
  const ad::ScalarFn f = [&] { return ad::sum(ad::tanh(p)); };
  auto analytic = ad::analytic_gradients(f, params.all());
  analytic[0][1] *= 1.1;
  const auto report = ad::compare_with_finite_differences(f, params.all(), analytic);
  EXPECT_GE(report.max_rel_error, 0.05);
  EXPECT_EQ(report.worst_parameter, "p");
  EXPECT_EQ(report.worst_index, 1u);
}

TEST(Primitives, AllPassGradientCheck) {
  std::mt19937_64 rng(9);
  ad::ParameterSet params;
  auto a = params.adopt("a", random_tensor({4, 3}, rng, true));
  auto b = params.adopt("b", random_tensor({1, 3}, rng, true));
  auto s = params.adopt("s", random_tensor({4, 1}, rng, true));
  auto c = params.adopt("c", random_tensor({1, 1}, rng, true));
  const std::vector<std::size_t> idx{3, 0, 0, 2, 1};
  const std::vector<std::size_t> seg{0, 1, 1, 0};
  const auto w = random_tensor({5, 3}, rng);
  const auto w2 = random_tensor({2, 3}, rng);
  EXPECT_LT(check(params, [&] { return ad::sum(ad::mul_column(ad::tanh(ad::add_row(a, b)), s)); }), 1e-6);
  EXPECT_LT(check(params, [&] { return ad::sum(ad::tanh(ad::add_scalar(a, c))); }), 1e-6);
  EXPECT_LT(check(params, [&] { return ad::sum(ad::mul_column(w, ad::tanh(ad::gather_rows(s, idx)))); }), 1e-6);
  EXPECT_LT(check(params, [&] {
              return ad::sum(ad::tanh(ad::concat_columns({ad::slice_columns(a, 1, 2), ad::stack_rows({b, b, b, b})})));
            }),
            1e-6);
  EXPECT_LT(check(params, [&] { return ad::sum(ad::matmul(ad::row_softmax(ad::matmul(a, ad::Tensor::from({3, 2}, {1, 2, 3, 4, 5, 6}))), ad::Tensor::from({2, 1}, {1.0, -2.0}))); }),
            1e-6);
  EXPECT_LT(check(params, [&] { return ad::sum(ad::tanh(ad::segment_max(a, seg, 2))); }), 1e-6);
  EXPECT_LT(check(params, [&] {
              return ad::sum(ad::tanh(ad::add(ad::segment_sum(a, seg, 2), w2)));
            }),
            1e-6);
}
