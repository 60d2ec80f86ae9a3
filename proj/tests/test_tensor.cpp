#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cudi/autograd.hpp"
#include "cudi/optim.hpp"

using namespace cudi;

namespace {

DenseArray random_array(Shape shape, std::uint64_t seed, float lo = -1.0f, float hi = 1.0f) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> d(lo, hi);
  DenseArray a(std::move(shape));
  for (float& v : a.values()) v = d(rng);
  return a;
}

}  // namespace

TEST(Tensor, ShapeAndDataMustAgree) {
  EXPECT_THROW(DenseArray(Shape{2, 2}, std::vector<float>{1, 2, 3}), ContractViolation);
  DenseArray a(Shape{2, 3}, 1.5f);
  EXPECT_EQ(a.size(), 6u);
  EXPECT_THROW(a.reshaped({4}), ContractViolation);
  EXPECT_EQ(a.reshaped({3, 2}).dim(0), 3u);
}

TEST(Conv, IdentityKernelReproducesInput) {
  const DenseArray x = random_array({1, 1, 4, 4}, 1);
  const DenseArray k(Shape{1, 1, 1, 1}, 1.0f);
  EXPECT_EQ(conv2d_forward(x, k, 1), x);
}

TEST(Conv, AllOnesThreeByThree) {
  const DenseArray x(Shape{1, 3, 3}, 1.0f);
  const DenseArray k(Shape{1, 1, 3, 3}, 1.0f);
  const DenseArray y = conv2d_forward(x, k, 1);
  ASSERT_EQ(y.shape(), (Shape{1, 3, 3}));
  EXPECT_FLOAT_EQ(y[4], 9.0f);
  EXPECT_FLOAT_EQ(y[0], 4.0f);
  EXPECT_FLOAT_EQ(y[8], 4.0f);
  EXPECT_FLOAT_EQ(y[1], 6.0f);
}

TEST(Conv, DepthwiseChannelsAreIsolated) {
  DenseArray x = random_array({1, 4, 6, 5}, 2);
  const DenseArray k = random_array({4, 1, 3, 3}, 3);
  const DenseArray y0 = conv2d_forward(x, k, 4);
  ASSERT_EQ(y0.shape(), (Shape{1, 4, 6, 5}));
  for (std::size_t i = 0; i < 30; ++i) x[2 * 30 + i] += 1.0f;  // perturb channel 2 only
  const DenseArray y1 = conv2d_forward(x, k, 4);
  for (std::size_t c = 0; c < 4; ++c) {
    bool same = true;
    for (std::size_t i = 0; i < 30; ++i) same = same && y0[c * 30 + i] == y1[c * 30 + i];
    EXPECT_EQ(same, c != 2) << "channel " << c;
  }
}

TEST(Conv, GroupedMatchesPerGroupConvolution) {
  const DenseArray x = random_array({2, 4, 5, 5}, 4);
  const DenseArray k = random_array({6, 2, 3, 3}, 5);
  const DenseArray y = conv2d_forward(x, k, 2);
  // Group 1 alone: input channels 2..3, output channels 3..5.
  DenseArray x1(Shape{2, 2, 5, 5});
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t i = 0; i < 25; ++i) x1[(n * 2 + c) * 25 + i] = x[(n * 4 + 2 + c) * 25 + i];
  DenseArray k1(Shape{3, 2, 3, 3});
  std::copy_n(k.raw() + 3 * 18, 3 * 18, k1.raw());
  const DenseArray y1 = conv2d_forward(x1, k1, 1);
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < 25; ++i) EXPECT_NEAR(y[(n * 6 + 3 + c) * 25 + i], y1[(n * 3 + c) * 25 + i], 1e-6);
}

TEST(Conv, BadGeometryIsConfigError) {
  const DenseArray x(Shape{1, 3, 4, 4});
  EXPECT_THROW(conv2d_forward(x, DenseArray(Shape{4, 2, 3, 3}), 2), ConfigError);  // 3 % 2
  EXPECT_THROW(conv2d_forward(x, DenseArray(Shape{4, 3, 2, 2}), 1), ConfigError);  // even kernel
  EXPECT_THROW(conv2d_forward(x, DenseArray(Shape{4, 2, 3, 3}), 1), ConfigError);  // Cin mismatch
}

TEST(Backward, SumGivesOnes) {
  Graph<double> g;
  const Var p = g.parameter(Tensor<double>(Shape{3}, std::vector<double>{1, -2, 5}));
  g.backward(ops::sum(g, p));
  for (double v : g.grad(p).values()) EXPECT_EQ(v, 1.0);
}

TEST(Backward, MeanOfSquares) {
  Graph<double> g;
  const Var p = g.parameter(Tensor<double>(Shape{2}, std::vector<double>{1, 2}));
  g.backward(ops::mean(g, ops::square(g, p)));
  EXPECT_DOUBLE_EQ(g.grad(p)[0], 1.0);
  EXPECT_DOUBLE_EQ(g.grad(p)[1], 2.0);
}

TEST(Backward, DetachedParameterHasZeroAdjoint) {
  Graph<double> g;
  const Var p = g.parameter(Tensor<double>(Shape{2}, 3.0));
  const Var q = g.parameter(Tensor<double>(Shape{2}, 1.0));
  g.backward(ops::sum(g, q));
  for (double v : g.grad(p).values()) EXPECT_EQ(v, 0.0);
}

TEST(Backward, NonScalarLossIsRejected) {
  Graph<double> g;
  const Var p = g.parameter(Tensor<double>(Shape{2}, 3.0));
  EXPECT_THROW(g.backward(ops::square(g, p)), ContractViolation);
}

TEST(Backward, Linearity) {
  const Tensor<double> init = random_array({1, 2, 6, 6}, 9).cast<double>();
  auto grads = [&](double a, double b) {
    Graph<double> g;
    const Var p = g.parameter(init);
    const Var l1 = ops::mean(g, ops::square(g, ops::tanh(g, p)));
    const Var l2 = ops::sum(g, ops::abs(g, ops::avg_pool(g, p, 2)));
    g.backward(ops::add(g, ops::scale(g, l1, a), ops::scale(g, l2, b)));
    return g.grad(p);
  };
  const auto g1 = grads(1, 0), g2 = grads(0, 1), gc = grads(2.5, -0.75);
  for (std::size_t i = 0; i < gc.size(); ++i) EXPECT_NEAR(gc[i], 2.5 * g1[i] - 0.75 * g2[i], 1e-5);
}

TEST(Adam, ZeroAdjointLeavesEverythingUnchanged) {
  std::vector<DenseArray> params{random_array({3, 3}, 11)};
  const auto before = params[0];
  AdamState st = AdamState::for_params(params, AdamConfig{kTeacherLearningRate});
  std::vector<DenseArray> adj{DenseArray(Shape{3, 3})};
  adam_step(params, adj, st);
  EXPECT_EQ(params[0], before);
  for (float v : st.first_moment[0].values()) EXPECT_EQ(v, 0.0f);
  for (float v : st.second_moment[0].values()) EXPECT_EQ(v, 0.0f);
  EXPECT_EQ(st.step, 1);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<DenseArray> params{DenseArray(Shape{1}, 0.5f)};
  AdamState st = AdamState::for_params(params, AdamConfig{1e-4});
  std::vector<DenseArray> adj{DenseArray(Shape{1}, 1.0f)};
  adam_step(params, adj, st);
  EXPECT_NEAR(0.5 - params[0][0], 1e-4, 1e-7);  // float spacing near 0.5
}

TEST(Adam, IdenticalInputsGiveIdenticalUpdates) {
  std::vector<DenseArray> params{DenseArray(Shape{2}, 0.25f)};
  AdamState st = AdamState::for_params(params, AdamConfig{5e-4});
  std::vector<DenseArray> adj{DenseArray(Shape{2}, -0.3f)};
  for (int i = 0; i < 5; ++i) adam_step(params, adj, st);
  EXPECT_EQ(params[0][0], params[0][1]);
}

TEST(Adam, ShapeMismatchIsContractViolation) {
  std::vector<DenseArray> params{DenseArray(Shape{2})};
  AdamState st = AdamState::for_params(params, AdamConfig{});
  std::vector<DenseArray> adj{DenseArray(Shape{3})};
  EXPECT_THROW(adam_step(params, adj, st), ContractViolation);
}

TEST(Resize, ConstantIsPreserved) {
  const DenseArray x(Shape{1, 2, 64, 64}, 0.5f);
  const DenseArray y = bilinear_resize(x, 0.25);
  ASSERT_EQ(y.shape(), (Shape{1, 2, 16, 16}));
  for (float v : y.values()) EXPECT_FLOAT_EQ(v, 0.5f);
  const DenseArray z = bilinear_resize(y, 4.0);
  ASSERT_EQ(z.shape(), (Shape{1, 2, 64, 64}));
  for (float v : z.values()) EXPECT_FLOAT_EQ(v, 0.5f);
}

TEST(Resize, SmoothRampRoundTrip) {
  DenseArray x(Shape{1, 1, 16, 16});
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t c = 0; c < 16; ++c) x.at(0, 0, y, c) = 0.03f * static_cast<float>(y) + 0.02f * static_cast<float>(c);
  const DenseArray back = bilinear_resize(bilinear_resize(x, 4.0), 0.25);
  ASSERT_EQ(back.shape(), x.shape());
  double worst = 0;
  for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(double(back[i]) - x[i]));
  EXPECT_LE(worst, 0.05);
}

TEST(Resize, OutputBelowOnePixelIsConfigError) {
  EXPECT_THROW(bilinear_resize(DenseArray(Shape{1, 1, 1, 1}), 0.25), ConfigError);
  EXPECT_EQ(scaled_dim(64, 0.25), 16u);
}

TEST(Determinism, ForwardAndBackwardAreBitIdentical) {
  const Tensor<float> x = random_array({2, 3, 8, 8}, 21);
  const Tensor<float> w = random_array({5, 3, 3, 3}, 22);
  auto run = [&] {
    Graph<float> g;
    const Var pw = g.parameter(w);
    const Var y = ops::relu(g, ops::conv2d(g, g.constant(x), pw, Var{}, 1));
    g.backward(ops::mean(g, y));
    return std::make_pair(g.value(y), g.grad(pw));
  };
  EXPECT_EQ(run(), run());
}
