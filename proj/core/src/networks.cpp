#include "cudi/networks.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace cudi {

// ---------------------------------------------------------------------------
// ConvNetwork

void ConvNetwork::add_layer(ConvSpec spec) {
  layers_.push_back(spec);
  params_.emplace_back(Shape{spec.out_channels, spec.in_channels / spec.groups, spec.kernel, spec.kernel});
  params_.emplace_back(Shape{spec.out_channels});
}

std::size_t ConvNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const DenseArray& p : params_) n += p.size();
  return n;
}

void ConvNetwork::init_weights(std::uint64_t seed, InitScheme scheme) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    DenseArray& p = params_[i];
    if (i % 2 == 1) {
      p.fill(0.0f);
      continue;
    }
    const ConvSpec& spec = layers_[i / 2];
    const double fan_in = static_cast<double>(spec.in_channels / spec.groups * spec.kernel * spec.kernel);
    const bool head = i / 2 + 1 == layers_.size();
    const double stddev = scheme == InitScheme::fixed || head ? kInitStddev : std::sqrt(2.0 / fan_in);
    std::normal_distribution<float> gauss(0.0f, static_cast<float>(stddev));
    for (float& v : p.values()) v = gauss(rng);
  }
}

std::vector<float> ConvNetwork::flatten() const {
  std::vector<float> flat;
  flat.reserve(parameter_count());
  for (const DenseArray& p : params_) flat.insert(flat.end(), p.values().begin(), p.values().end());
  return flat;
}

void ConvNetwork::unflatten(std::span<const float> flat) {
  if (flat.size() != parameter_count()) {
    throw CorruptCheckpoint("parameter payload holds " + std::to_string(flat.size()) +
                            " values, architecture needs " + std::to_string(parameter_count()));
  }
  std::size_t offset = 0;
  for (DenseArray& p : params_) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), p.size(), p.raw());
    offset += p.size();
  }
}

template <typename T>
std::vector<Var> ConvNetwork::bind(Graph<T>& g, bool trainable) const {
  std::vector<Var> bound;
  bound.reserve(params_.size());
  for (const DenseArray& p : params_) {
    Tensor<T> t = p.template cast<T>();
    bound.push_back(trainable ? g.parameter(std::move(t)) : g.constant(std::move(t)));
  }
  return bound;
}

template <typename T>
std::vector<DenseArray> ConvNetwork::gradients(const Graph<T>& g, std::span<const Var> bound) const {
  std::vector<DenseArray> grads;
  grads.reserve(bound.size());
  for (Var v : bound) grads.push_back(g.grad(v).template cast<float>());
  return grads;
}

template <typename T>
Var ConvNetwork::conv(Graph<T>& g, std::span<const Var> bound, std::size_t layer, Var x) const {
  if (bound.size() != params_.size()) {
    throw ContractViolation("network: expected " + std::to_string(params_.size()) + " bound parameters, got " +
                            std::to_string(bound.size()));
  }
  return ops::conv2d(g, x, bound[2 * layer], bound[2 * layer + 1], layers_[layer].groups);
}

template std::vector<Var> ConvNetwork::bind<float>(Graph<float>&, bool) const;
template std::vector<Var> ConvNetwork::bind<double>(Graph<double>&, bool) const;
template std::vector<DenseArray> ConvNetwork::gradients<float>(const Graph<float>&, std::span<const Var>) const;
template std::vector<DenseArray> ConvNetwork::gradients<double>(const Graph<double>&, std::span<const Var>) const;

namespace {

template <typename T>
void require_pair(const Graph<T>& g, Var image, Var emap) {
  const Tensor<T>& i = g.value(image);
  const Tensor<T>& e = g.value(emap);
  if (i.rank() != 4 || e.rank() != 4 || i.channels() != 3 || e.channels() != 1 || i.batch() != e.batch() ||
      i.height() != e.height() || i.width() != e.width()) {
    throw ContractViolation("network input: image " + shape_string(i.shape()) + " and exposure map " +
                            shape_string(e.shape()) + " do not pair up");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Teacher

std::array<std::size_t, 4> TeacherConfig::channels() const {
  if (!(width > 0.0 && width <= 1.0)) {
    throw ConfigError("teacher width multiplier must lie in (0, 1], got " + std::to_string(width));
  }
  std::array<std::size_t, 4> out{};
  const std::array<double, 4> base{32, 64, 128, 256};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto scaled = static_cast<std::size_t>(std::lround(base[i] * width / 4.0)) * 4;
    out[i] = std::max<std::size_t>(4, scaled);
  }
  return out;
}

TeacherNet::TeacherNet(TeacherConfig cfg) : cfg_(cfg) {
  if (cfg_.iterations == 0) throw ConfigError("teacher: iteration count must be at least 1");
  const auto [c1, c2, c3, c4] = cfg_.channels();
  auto stage = [this](std::size_t in, std::size_t out) {
    add_layer({in, out, 3, 1});
    add_layer({out, out, 3, 1});
    add_layer({out, out, 3, 1});
  };
  stage(kInputChannels, c1);  // L1
  stage(c1, c2);              // L2
  stage(c2, c3);              // L3
  stage(c3, c4);              // L4
  stage(c4, c4);              // L5
  stage(c4 + c3, c3);         // L6
  stage(c3 + c2, c2);         // L7
  stage(c2 + c1, c1);         // L8
  add_layer({c1, cfg_.output_channels(), 3, 1});  // L9
}

template <typename T>
Var TeacherNet::forward(Graph<T>& g, Var image, Var emap, std::span<const Var> bound) const {
  require_pair(g, image, emap);
  std::size_t layer = 0;
  auto stage = [&](Var x) {
    for (int i = 0; i < 3; ++i) x = ops::relu(g, conv(g, bound, layer++, x));
    return x;
  };
  const Var e1 = stage(ops::concat_channels(g, {image, emap}));
  const Var e2 = stage(e1);
  const Var e3 = stage(e2);
  const Var e4 = stage(e3);
  const Var d5 = stage(e4);
  const Var d6 = stage(ops::concat_channels(g, {d5, e3}));
  const Var d7 = stage(ops::concat_channels(g, {d6, e2}));
  const Var d8 = stage(ops::concat_channels(g, {d7, e1}));
  return ops::tanh(g, conv(g, bound, layer, d8));
}

DenseArray TeacherNet::predict_batch(const DenseArray& images, const DenseArray& maps) const {
  Graph<float> g(false);
  const auto bound = bind(g, false);
  const Var out = forward(g, g.constant(images), g.constant(maps), bound);
  return g.value(out);
}

CurveParamStack TeacherNet::predict(const Image& image, const ExposureMap& emap) const {
  const DenseArray images = stack_images(std::span<const Image>(&image, 1));
  const DenseArray maps = stack_maps(std::span<const ExposureMap>(&emap, 1));
  return CurveParamStack::from_network_output(predict_batch(images, maps), 0);
}

template Var TeacherNet::forward<float>(Graph<float>&, Var, Var, std::span<const Var>) const;
template Var TeacherNet::forward<double>(Graph<double>&, Var, Var, std::span<const Var>) const;

// ---------------------------------------------------------------------------
// Student

StudentNet::StudentNet(StudentConfig cfg) : cfg_(cfg) {
  if (cfg_.trunk == 0 || cfg_.downsample == 0) throw ConfigError("student: trunk and downsample must be positive");
  const std::size_t t = cfg_.trunk;
  const std::size_t wide = 2 * t;
  auto separable = [this](std::size_t in, std::size_t out) {
    add_layer({in, in, 3, in});    // depthwise
    add_layer({in, out, 1, 1});    // pointwise
  };
  separable(kInputChannels, t);    // L1
  separable(t, t);                 // L2
  separable(t, t);                 // L3
  separable(t, t);                 // L4
  separable(wide, t);              // L5
  separable(wide, t);              // L6
  separable(wide, kOutputChannels);  // L7
}

template <typename T>
StudentOutputs StudentNet::forward(Graph<T>& g, Var image, Var emap, std::span<const Var> bound) const {
  require_pair(g, image, emap);
  const std::size_t h = g.value(image).height();
  const std::size_t w = g.value(image).width();
  if (h < kMinInputSize || w < kMinInputSize) {
    throw ConfigError("student: input must be at least 8x8, got " + std::to_string(h) + "x" + std::to_string(w));
  }
  const double factor = 1.0 / static_cast<double>(cfg_.downsample);
  std::size_t layer = 0;
  auto block = [&](Var x, bool activate) {
    x = conv(g, bound, layer++, x);
    x = conv(g, bound, layer++, x);
    return activate ? ops::relu(g, x) : x;
  };
  const Var small = ops::resize_bilinear(g, ops::concat_channels(g, {image, emap}), factor);
  const Var s1 = block(small, true);
  const Var s2 = block(s1, true);
  const Var s3 = block(s2, true);
  const Var s4 = block(s3, true);
  const Var s5 = block(ops::concat_channels(g, {s4, s3}), true);
  const Var s6 = block(ops::concat_channels(g, {s5, s2}), true);
  StudentOutputs out;
  out.low_res = block(ops::concat_channels(g, {s6, s1}), false);
  const Var up = ops::resize_bilinear(g, out.low_res, h, w);
  out.slope = ops::slice_channels(g, up, 0, 3);
  out.intercept = ops::slice_channels(g, up, 3, 6);
  return out;
}

DenseArray StudentNet::predict_batch(const DenseArray& images, const DenseArray& maps) const {
  Graph<float> g(false);
  const auto bound = bind(g, false);
  const StudentOutputs out = forward(g, g.constant(images), g.constant(maps), bound);
  return g.value(ops::concat_channels(g, {out.slope, out.intercept}));
}

TangentMaps StudentNet::predict(const Image& image, const ExposureMap& emap) const {
  const DenseArray images = stack_images(std::span<const Image>(&image, 1));
  const DenseArray maps = stack_maps(std::span<const ExposureMap>(&emap, 1));
  return TangentMaps::from_network_output(predict_batch(images, maps), 0);
}

template StudentOutputs StudentNet::forward<float>(Graph<float>&, Var, Var, std::span<const Var>) const;
template StudentOutputs StudentNet::forward<double>(Graph<double>&, Var, Var, std::span<const Var>) const;

}  // namespace cudi
