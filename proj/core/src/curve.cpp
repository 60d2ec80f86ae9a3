#include "cudi/curve.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace cudi {

CurveParamStack::CurveParamStack(DenseArray v) : values(std::move(v)) {
  if (values.rank() != 4 || values.dim(1) != Image::kChannels) {
    throw ContractViolation("curve params: expected (n,3,H,W), got " + shape_string(values.shape()));
  }
}

CurveParamStack::CurveParamStack(std::size_t iterations, std::size_t height, std::size_t width, float fill)
    : values({iterations, Image::kChannels, height, width}, fill) {}

DenseArray CurveParamStack::slice(std::size_t j) const {
  const std::size_t stride = Image::kChannels * height() * width();
  std::vector<float> data(values.raw() + j * stride, values.raw() + (j + 1) * stride);
  return DenseArray({Image::kChannels, height(), width()}, std::move(data));
}

CurveParamStack CurveParamStack::from_network_output(const DenseArray& batch, std::size_t index) {
  DenseArray item = unstack(batch, index);
  if (item.dim(0) % Image::kChannels != 0) {
    throw ContractViolation("curve params: channel count " + std::to_string(item.dim(0)) +
                            " is not a multiple of 3");
  }
  const std::size_t n = item.dim(0) / Image::kChannels;
  const std::size_t h = item.dim(1);
  const std::size_t w = item.dim(2);
  return CurveParamStack(std::move(item).reshaped({n, Image::kChannels, h, w}));
}

TangentMaps TangentMaps::from_network_output(const DenseArray& batch, std::size_t index) {
  if (batch.rank() != 4 || batch.channels() != 2 * Image::kChannels) {
    throw ContractViolation("tangent maps: expected (B,6,H,W), got " + shape_string(batch.shape()));
  }
  const DenseArray item = unstack(batch, index);
  const std::size_t plane = item.dim(1) * item.dim(2);
  const std::size_t half = Image::kChannels * plane;
  TangentMaps maps;
  maps.slope = DenseArray({Image::kChannels, item.dim(1), item.dim(2)},
                          std::vector<float>(item.raw(), item.raw() + half));
  maps.intercept = DenseArray({Image::kChannels, item.dim(1), item.dim(2)},
                              std::vector<float>(item.raw() + half, item.raw() + 2 * half));
  return maps;
}

namespace {

void require_matching(const Image& image, const DenseArray& map, const char* what) {
  if (map.rank() != 3 || map.dim(0) != Image::kChannels || map.dim(1) != image.height() ||
      map.dim(2) != image.width()) {
    throw ContractViolation(std::string(what) + ": map " + shape_string(map.shape()) +
                            " does not match image " + shape_string(image.array().shape()));
  }
}

void require_matching(const Image& image, const CurveParamStack& params) {
  if (params.values.rank() != 4 || params.values.dim(1) != Image::kChannels ||
      params.height() != image.height() || params.width() != image.width()) {
    throw ContractViolation("curve: params " + shape_string(params.values.shape()) + " do not match image " +
                            shape_string(image.array().shape()));
  }
  if (params.iterations() == 0) throw ConfigError("curve: iteration count must be at least 1");
}

// Evaluated in double so the float result stays inside [0,1].
inline float curve_step(float x, float a) {
  const double xd = x;
  return static_cast<float>(xd + static_cast<double>(a) * xd * (1.0 - xd));
}

}  // namespace

Image le_step(const Image& image, const DenseArray& alpha) {
  require_matching(image, alpha, "le_step");
  Image out = image;
  float* y = out.array().raw();
  const float* a = alpha.raw();
  for (std::size_t i = 0; i < out.array().size(); ++i) y[i] = curve_step(y[i], a[i]);
  return out;
}

Image apply_high_order(const Image& image, const CurveParamStack& params) {
  require_matching(image, params);
  Image out = image;
  float* y = out.array().raw();
  const std::size_t stride = out.array().size();
  for (std::size_t j = 0; j < params.iterations(); ++j) {
    const float* a = params.values.raw() + j * stride;
    for (std::size_t i = 0; i < stride; ++i) y[i] = curve_step(y[i], a[i]);
  }
  return out;
}

Image apply_tangent(const Image& image, const TangentMaps& maps, bool clamp) {
  require_matching(image, maps.slope, "apply_tangent");
  require_matching(image, maps.intercept, "apply_tangent");
  Image out = image;
  float* y = out.array().raw();
  const float* k = maps.slope.raw();
  const float* b = maps.intercept.raw();
  for (std::size_t i = 0; i < out.array().size(); ++i) {
    float v = k[i] * y[i] + b[i];
    if (clamp) v = std::clamp(v, 0.0f, 1.0f);
    y[i] = v;
  }
  return out;
}

TangentMaps analytic_tangent(const Image& image, const CurveParamStack& params) {
  require_matching(image, params);
  const std::size_t stride = image.array().size();
  TangentMaps maps;
  maps.slope = DenseArray(image.array().shape());
  maps.intercept = DenseArray(image.array().shape());
  const float* in = image.array().raw();
  for (std::size_t i = 0; i < stride; ++i) {
    float y = in[i];
    double k = 1.0;
    for (std::size_t j = 0; j < params.iterations(); ++j) {
      const float a = params.values[j * stride + i];
      k *= 1.0 + static_cast<double>(a) * (1.0 - 2.0 * static_cast<double>(y));
      y = curve_step(y, a);
    }
    maps.slope[i] = static_cast<float>(k);
    maps.intercept[i] = static_cast<float>(static_cast<double>(y) - k * static_cast<double>(in[i]));
  }
  return maps;
}

namespace curve {

template <typename T>
Var high_order(Graph<T>& g, Var image, Var params) {
  const Tensor<T>& img = g.value(image);
  const Tensor<T>& p = g.value(params);
  if (img.rank() != 4 || img.channels() != Image::kChannels || p.rank() != 4 ||
      p.channels() % Image::kChannels != 0 || p.channels() == 0 || p.batch() != img.batch() ||
      p.height() != img.height() || p.width() != img.width()) {
    throw ContractViolation("curve::high_order: image " + shape_string(img.shape()) + " and params " +
                            shape_string(p.shape()) + " are incompatible");
  }
  const std::size_t n = p.channels() / Image::kChannels;
  Var x = image;
  for (std::size_t j = 0; j < n; ++j) {
    const Var alpha = ops::slice_channels(g, params, j * Image::kChannels, (j + 1) * Image::kChannels);
    x = ops::quadratic_curve_step(g, x, alpha);
  }
  return x;
}

template <typename T>
Var tangent_line(Graph<T>& g, Var image, Var slope, Var intercept) {
  return ops::add(g, ops::mul(g, slope, image), intercept);
}

template Var high_order<float>(Graph<float>&, Var, Var);
template Var high_order<double>(Graph<double>&, Var, Var);
template Var tangent_line<float>(Graph<float>&, Var, Var, Var);
template Var tangent_line<double>(Graph<double>&, Var, Var, Var);

}  // namespace curve

}  // namespace cudi
