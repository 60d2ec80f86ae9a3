#include <gtest/gtest.h>

#include <cmath>

#include "cudi/exposure_map.hpp"
#include "cudi/networks.hpp"

using namespace cudi;

namespace {

Image random_image(std::size_t h, std::size_t w, std::uint32_t seed) {
  Image im(h, w);
  for (float& v : im.array().values()) {
    seed = seed * 1664525u + 1013904223u;
    v = static_cast<float>(seed >> 8) / 16777216.0f;
  }
  return im;
}

void zero_last_layer(ConvNetwork& net) {
  auto& p = net.parameters();
  p[p.size() - 2].fill(0.0f);
  p[p.size() - 1].fill(0.0f);
}

}  // namespace

TEST(Teacher, FullWidthParameterCount) {
  const TeacherNet net;
  EXPECT_EQ(net.parameter_count(), 4701912u);
  EXPECT_NEAR(static_cast<double>(net.parameter_count()), 4.7e6, 0.05 * 4.7e6);
  EXPECT_EQ(net.layers().size(), 25u);
}

TEST(Teacher, WidthScaling) {
  EXPECT_EQ(TeacherConfig{}.channels(), (std::array<std::size_t, 4>{32, 64, 128, 256}));
  EXPECT_EQ(TeacherConfig::desk_scale().channels(), (std::array<std::size_t, 4>{8, 16, 32, 64}));
  EXPECT_EQ((TeacherConfig{0.01, 8}.channels()), (std::array<std::size_t, 4>{4, 4, 4, 4}));
  EXPECT_THROW((TeacherConfig{1.5, 8}.channels()), ConfigError);
  EXPECT_THROW((TeacherConfig{0.0, 8}.channels()), ConfigError);
}

TEST(Teacher, OutputShapeAndRange) {
  TeacherNet net(TeacherConfig::desk_scale());
  net.init_weights(3);
  const Image im = random_image(64, 64, 1);
  const CurveParamStack p = net.predict(im, uniform_map(0.6f, 64, 64));
  ASSERT_EQ(p.values.shape(), (Shape{8, 3, 64, 64}));
  for (float v : p.values.values()) {
    ASSERT_GE(v, -1.0f);
    ASSERT_LE(v, 1.0f);
  }
}

TEST(Teacher, ZeroHeadGivesIdentityCurve) {
  TeacherNet net(TeacherConfig::desk_scale());
  net.init_weights(4);
  zero_last_layer(net);
  const Image im = random_image(32, 32, 2);
  const CurveParamStack p = net.predict(im, uniform_map(0.6f, 32, 32));
  for (float v : p.values.values()) ASSERT_EQ(v, 0.0f);
  EXPECT_EQ(apply_high_order(im, p), im);
}

TEST(Teacher, MismatchedInputsAreContractViolation) {
  TeacherNet net(TeacherConfig::desk_scale());
  EXPECT_THROW(net.predict(Image(16, 16), uniform_map(0.5f, 16, 20)), ContractViolation);
}

TEST(Student, DefaultParameterCount) {
  const StudentNet net;
  // L1 dw4+pw4->16, L2-L4 dw16+pw16, L5-L6 dw32+pw32->16, L7 dw32+pw32->6, biases on every conv.
  EXPECT_EQ(net.parameter_count(), 120u + 3 * 432u + 2 * 848u + 518u);
  EXPECT_EQ(net.parameter_count(), 3630u);
  EXPECT_EQ(net.layers().size(), 14u);
}

TEST(Student, OutputShapes) {
  StudentNet net;
  net.init_weights(5);
  const TangentMaps t = net.predict(random_image(64, 64, 3), uniform_map(0.6f, 64, 64));
  EXPECT_EQ(t.slope.shape(), (Shape{3, 64, 64}));
  EXPECT_EQ(t.intercept.shape(), (Shape{3, 64, 64}));
}

TEST(Student, ZeroHeadGivesZeroLine) {
  StudentNet net;
  net.init_weights(6);
  zero_last_layer(net);
  const Image im = random_image(32, 32, 4);
  const TangentMaps t = net.predict(im, uniform_map(0.6f, 32, 32));
  for (float v : t.slope.values()) ASSERT_EQ(v, 0.0f);
  for (float v : t.intercept.values()) ASSERT_EQ(v, 0.0f);
  const Image out = apply_tangent(im, t, false);
  for (float v : out.array().values()) ASSERT_EQ(v, 0.0f);
}

TEST(Student, TooSmallInputIsConfigError) {
  StudentNet net;
  EXPECT_THROW(net.predict(Image(7, 16), uniform_map(0.5f, 7, 16)), ConfigError);
}

TEST(Student, ShiftByFourShiftsLowResolutionOutputByOne) {
  StudentNet net;
  net.init_weights(7);
  const Image big = random_image(32, 144, 5);
  auto crop = [&](std::size_t x0) {
    Image out(32, 128);
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t y = 0; y < 32; ++y)
        for (std::size_t x = 0; x < 128; ++x) out.at(c, y, x) = big.at(c, y, x + x0);
    return out;
  };
  auto low_res = [&](const Image& im) {
    Graph<float> g(false);
    const auto bound = net.bind(g, false);
    const DenseArray imgs = stack_images(std::span<const Image>(&im, 1));
    const DenseArray maps(Shape{1, 1, 32, 128}, 0.5f);
    return g.value(net.forward(g, g.constant(imgs), g.constant(maps), bound).low_res);
  };
  const DenseArray a = low_res(crop(8));
  const DenseArray b = low_res(crop(12));
  ASSERT_EQ(a.shape(), (Shape{1, 6, 8, 32}));
  // Seven 3x3 depthwise stages: columns within 7 of either border see padding.
  for (std::size_t c = 0; c < 6; ++c)
    for (std::size_t y = 0; y < 8; ++y)
      for (std::size_t x = 7; x + 1 < 32 - 7; ++x) {
        EXPECT_NEAR(a.at(0, c, y, x + 1), b.at(0, c, y, x), 1e-4) << c << "," << y << "," << x;
      }
}

TEST(Init, SameSeedSameParameters) {
  TeacherNet a(TeacherConfig::desk_scale()), b(TeacherConfig::desk_scale());
  a.init_weights(9);
  b.init_weights(9);
  EXPECT_EQ(a.flatten(), b.flatten());
  b.init_weights(10);
  EXPECT_NE(a.flatten(), b.flatten());
}

TEST(Init, BiasesAreZero) {
  StudentNet net;
  net.init_weights(11);
  for (std::size_t i = 1; i < net.parameters().size(); i += 2)
    for (float v : net.parameters()[i].values()) EXPECT_EQ(v, 0.0f);
}

TEST(Init, FixedSchemeStatistics) {
  TeacherNet net;
  net.init_weights(12, InitScheme::fixed);
  const DenseArray& w = net.parameters()[2 * 12];  // 256x256x3x3 layer
  ASSERT_GE(w.size(), 10000u);
  double sum = 0, sq = 0;
  for (float v : w.values()) {
    sum += v;
    sq += double(v) * v;
  }
  const double n = static_cast<double>(w.size());
  const double mean = sum / n;
  EXPECT_LE(std::abs(mean), 3 * kInitStddev / std::sqrt(n));
  EXPECT_NEAR(std::sqrt(sq / n - mean * mean), kInitStddev, 0.02 * kInitStddev);
}

TEST(Init, HeSchemeScalesWithFanIn) {
  StudentNet net;
  net.init_weights(13, InitScheme::he);
  const DenseArray& pw = net.parameters()[2 * 3];  // pointwise 16 -> 16
  double sq = 0;
  for (float v : pw.values()) sq += double(v) * v;
  EXPECT_NEAR(std::sqrt(sq / pw.size()), std::sqrt(2.0 / 16.0), 0.1);
}

TEST(Init, HeSchemeKeepsSmallHead) {
  TeacherNet net(TeacherConfig::desk_scale());
  net.init_weights(16, InitScheme::he);
  const DenseArray& head = net.parameters()[2 * 24];
  double sq = 0;
  for (float v : head.values()) sq += double(v) * v;
  EXPECT_NEAR(std::sqrt(sq / head.size()), kInitStddev, 0.1 * kInitStddev);
  const Image im = random_image(16, 16, 2);
  const CurveParamStack p = net.predict(im, uniform_map(0.5f, 16, 16));
  for (float v : p.values.values()) EXPECT_LT(std::abs(v), 0.5f);
}

TEST(Forward, Deterministic) {
  StudentNet net;
  net.init_weights(14);
  const Image im = random_image(32, 32, 6);
  const ExposureMap m = uniform_map(0.4f, 32, 32);
  const TangentMaps a = net.predict(im, m), b = net.predict(im, m);
  EXPECT_EQ(a.slope, b.slope);
  EXPECT_EQ(a.intercept, b.intercept);
}

TEST(Flatten, RoundTripAndLengthCheck) {
  StudentNet a;
  a.init_weights(15);
  StudentNet b;
  b.unflatten(a.flatten());
  EXPECT_EQ(a.flatten(), b.flatten());
  std::vector<float> short_payload(10);
  EXPECT_THROW(b.unflatten(short_payload), CorruptCheckpoint);
}
