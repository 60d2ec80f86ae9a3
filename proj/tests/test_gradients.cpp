// Finite-difference checks of every op and loss, in double precision.

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gradient_cases.hpp"

using namespace cudi;
using namespace cudi::testing;

namespace {

class Gradient : public ::testing::TestWithParam<GradCase> {};

std::string case_name(const ::testing::TestParamInfo<GradCase>& info) {
  std::string n = info.param.name;
  for (char& c : n)
    if (c == '/') c = '_';
  return n;
}

}  // namespace

TEST_P(Gradient, MatchesFiniteDifferences) {
  const GradCase& c = GetParam();
  const GradCheckReport r = gradient_check<double>(c.loss, c.params, c.probes, c.seed, c.step);
  EXPECT_LE(r.max_relative_error, c.tolerance) << c.name << " worst index " << r.worst_index << " analytic "
                                               << r.analytic_at_worst << " numeric " << r.numeric_at_worst;
}

INSTANTIATE_TEST_SUITE_P(Ops, Gradient, ::testing::ValuesIn(op_grad_cases()), case_name);
INSTANTIATE_TEST_SUITE_P(Losses, Gradient, ::testing::ValuesIn(loss_grad_cases()), case_name);

TEST(ComposedGradient, TeacherTotalDefaultInit) {
  TeacherNet net{TeacherConfig{0.125, 8}};
  net.init_weights(5, InitScheme::fixed);
  for (const GradCase& c : composed_teacher_cases(net)) EXPECT_LE(c.error(), c.tolerance) << c.name;
}

TEST(ComposedGradient, TeacherTotalHeInit) {
  TeacherNet net{TeacherConfig{0.125, 8}};
  net.init_weights(5, InitScheme::he);
  for (SmoothnessNorm norm : {SmoothnessNorm::sum, SmoothnessNorm::mean}) {
    for (std::size_t layer : kTeacherProbeLayers) {
      // Mid-network gradients shrink to ~1e-7 under the mean norm, so a 1e-6 step there is roundoff-bound.
      const double step = layer == 12 ? 1e-5 : kKinkFreeStep;
      const T w = net.parameters()[2 * layer].cast<double>();
      EXPECT_LE(gradient_check_error<double>(teacher_total_builder(net, layer, norm), w, 32, layer, step), kTol)
          << "layer " << layer;
    }
  }
}

TEST(ComposedGradient, FloatAdjointsTrackDouble) {
  TeacherNet net{TeacherConfig{0.125, 8}};
  net.init_weights(5, InitScheme::he);
  const Tensor<double> images = image(50, 1, 16, 16);
  const Tensor<double> maps = random_tensor({1, 1, 16, 16}, 51, 0.2, 0.8);
  auto adjoint = [&]<typename U>(Graph<U>& g) {
    auto bound = net.bind(g, true);
    const Var img = g.constant(images.cast<U>());
    const Var params = net.forward(g, img, g.constant(maps.cast<U>()), bound);
    LossConfig cfg;
    cfg.smoothness_norm = SmoothnessNorm::mean;
    g.backward(losses::teacher_total(g, curve::high_order(g, img, params), img, g.constant(maps.cast<U>()), params, 8,
                                     cfg)
                   .total);
    return g.grad(bound[24]).template cast<double>();
  };
  Graph<float> gf;
  G gd;
  const T af = adjoint(gf);
  const T ad = adjoint(gd);
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < ad.size(); ++i) {
    diff += (af[i] - ad[i]) * (af[i] - ad[i]);
    norm += ad[i] * ad[i];
  }
  EXPECT_LE(std::sqrt(diff / norm), 1e-2);
}

TEST(ComposedGradient, StudentDistillation) {
  StudentNet net;
  net.init_weights(6);
  const T img = image(60, 1, 16, 16);
  const T maps = random_tensor({1, 1, 16, 16}, 61, 0.2, 0.8);
  const T target = image(62, 1, 16, 16);
  for (std::size_t layer : {0u, 7u, 13u}) {
    auto loss = [&](G& g, Var p) {
      auto bound = net.bind(g, false);
      bound[2 * layer] = p;
      const Var im = g.constant(img);
      const StudentOutputs out = net.forward(g, im, g.constant(maps), bound);
      return losses::distill_l1(g, curve::tangent_line(g, im, out.slope, out.intercept), g.constant(target));
    };
    const T w = net.parameters()[2 * layer].cast<double>();
    EXPECT_LE(gradient_check_error<double>(loss, w, 32, layer, kKinkFreeStep), kTol) << "layer " << layer;
  }
}

TEST(GradCheck, QuadraticOnRandomParams) {
  auto loss = [](G& g, Var p) { return ops::sum(g, ops::square(g, p)); };
  EXPECT_LE(gradient_check_error<double>(loss, random_tensor({3, 3}, 70), 9), 1e-3);
}

TEST(GradCheck, ConstantLossHasZeroError) {
  auto loss = [](G& g, Var p) { return ops::scale(g, ops::sum(g, p), 0.0); };
  const GradCheckReport r = gradient_check<double>(loss, random_tensor({4}, 71), 4);
  EXPECT_EQ(r.max_relative_error, 0.0);
}

TEST(GradCheck, NonFiniteLossIsNumericError) {
  auto loss = [](G& g, Var p) { return ops::scale(g, ops::sum(g, p), std::numeric_limits<double>::infinity()); };
  EXPECT_THROW(gradient_check<double>(loss, random_tensor({2}, 72), 2), NumericError);
}
