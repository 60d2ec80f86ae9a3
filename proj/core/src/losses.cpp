#include "cudi/losses.hpp"

#include <string>

namespace cudi::losses {
namespace {

template <typename T>
const Tensor<T>& nchw(const Graph<T>& g, Var v, const char* what) {
  const Tensor<T>& t = g.value(v);
  if (t.rank() != 4) throw ContractViolation(std::string(what) + ": expected NCHW, got " + shape_string(t.shape()));
  return t;
}

// Horizontal and vertical neighbour differences of a (B,C,h,w) tensor.
template <typename T>
Var diff_x(Graph<T>& g, Var a) {
  const Tensor<T>& t = g.value(a);
  const std::size_t h = t.height();
  const std::size_t w = t.width();
  return ops::sub(g, ops::crop(g, a, 0, h, 1, w), ops::crop(g, a, 0, h, 0, w - 1));
}

template <typename T>
Var diff_y(Graph<T>& g, Var a) {
  const Tensor<T>& t = g.value(a);
  const std::size_t h = t.height();
  const std::size_t w = t.width();
  return ops::sub(g, ops::crop(g, a, 1, h, 0, w), ops::crop(g, a, 0, h - 1, 0, w));
}

}  // namespace

template <typename T>
Var spatial_exposure_control(Graph<T>& g, Var result, Var emap, std::size_t region) {
  const Tensor<T>& r = nchw(g, result, "spatial_exposure_control");
  const Tensor<T>& e = nchw(g, emap, "spatial_exposure_control");
  if (r.batch() != e.batch() || r.height() != e.height() || r.width() != e.width() || e.channels() != 1) {
    throw ContractViolation("spatial_exposure_control: result " + shape_string(r.shape()) +
                            " and exposure map " + shape_string(e.shape()) + " differ");
  }
  if (r.height() < region || r.width() < region) {
    throw ConfigError("spatial_exposure_control: image " + std::to_string(r.height()) + "x" +
                      std::to_string(r.width()) + " is smaller than one " + std::to_string(region) +
                      "x" + std::to_string(region) + " tile");
  }
  const Var result_tiles = ops::avg_pool(g, ops::channel_mean(g, result), region);
  const Var emap_tiles = ops::avg_pool(g, emap, region);
  return ops::mean(g, ops::abs(g, ops::sub(g, result_tiles, emap_tiles)));
}

template <typename T>
Var spatial_consistency(Graph<T>& g, Var result, Var input, std::size_t region) {
  const Tensor<T>& r = nchw(g, result, "spatial_consistency");
  require_same_shape(r, g.value(input), "spatial_consistency");
  if (r.height() < region || r.width() < region) {
    throw ConfigError("spatial_consistency: image smaller than one region");
  }
  const double batch = static_cast<double>(r.batch());
  const Var pr = ops::avg_pool(g, ops::channel_mean(g, result), region);
  const Var pi = ops::avg_pool(g, ops::channel_mean(g, input), region);
  const std::size_t gh = g.value(pr).height();
  const std::size_t gw = g.value(pr).width();
  const double regions = static_cast<double>(gh * gw);

  Var total = ops::scale(g, ops::sum(g, pr), 0.0);
  auto accumulate = [&](Var dr, Var di) {
    const Var term = ops::square(g, ops::sub(g, ops::abs(g, dr), ops::abs(g, di)));
    total = ops::add(g, total, ops::sum(g, term));
  };
  if (gw > 1) accumulate(diff_x(g, pr), diff_x(g, pi));
  if (gh > 1) accumulate(diff_y(g, pr), diff_y(g, pi));
  // Every neighbouring pair appears once in each region's neighbourhood.
  return ops::scale(g, total, 2.0 / (regions * batch));
}

template <typename T>
Var color_constancy(Graph<T>& g, Var result) {
  const Tensor<T>& r = nchw(g, result, "color_constancy");
  if (r.channels() != 3) throw ContractViolation("color_constancy: expected 3 channels");
  const double batch = static_cast<double>(r.batch());
  const Var means = ops::mean_hw(g, result);
  const Var red = ops::slice_channels(g, means, 0, 1);
  const Var green = ops::slice_channels(g, means, 1, 2);
  const Var blue = ops::slice_channels(g, means, 2, 3);
  Var total = ops::sum(g, ops::square(g, ops::sub(g, red, green)));
  total = ops::add(g, total, ops::sum(g, ops::square(g, ops::sub(g, red, blue))));
  total = ops::add(g, total, ops::sum(g, ops::square(g, ops::sub(g, green, blue))));
  return ops::scale(g, total, 1.0 / batch);
}

template <typename T>
Var illumination_smoothness(Graph<T>& g, Var params, std::size_t iterations, SmoothnessNorm norm) {
  const Tensor<T>& p = nchw(g, params, "illumination_smoothness");
  if (p.height() < 2 || p.width() < 2) {
    throw ConfigError("illumination_smoothness: parameter maps need at least 2x2 pixels");
  }
  if (iterations == 0) throw ConfigError("illumination_smoothness: iteration count must be positive");
  const double batch = static_cast<double>(p.batch());
  const Var gx = ops::abs(g, diff_x(g, params));
  const Var gy = ops::abs(g, diff_y(g, params));
  const Var tv = norm == SmoothnessNorm::sum ? ops::add(g, ops::sum_hw(g, gx), ops::sum_hw(g, gy))
                                             : ops::add(g, ops::mean_hw(g, gx), ops::mean_hw(g, gy));
  return ops::scale(g, ops::sum(g, ops::square(g, tv)), 1.0 / (static_cast<double>(iterations) * batch));
}

template <typename T>
TeacherLossTerms teacher_total(Graph<T>& g, Var result, Var input, Var emap, Var params,
                               std::size_t iterations, const LossConfig& cfg) {
  TeacherLossTerms t;
  t.exposure = spatial_exposure_control(g, result, emap, cfg.exposure_region);
  t.consistency = spatial_consistency(g, result, input, cfg.consistency_region);
  t.color = color_constancy(g, result);
  t.smoothness = illumination_smoothness(g, params, iterations, cfg.smoothness_norm);
  Var total = ops::scale(g, t.exposure, cfg.weight_exposure);
  total = ops::add(g, total, ops::scale(g, t.consistency, cfg.weight_consistency));
  total = ops::add(g, total, ops::scale(g, t.color, cfg.weight_color));
  total = ops::add(g, total, ops::scale(g, t.smoothness, cfg.weight_smoothness));
  t.total = total;
  return t;
}

template <typename T>
Var distill_l1(Graph<T>& g, Var student_out, Var target) {
  require_same_shape(g.value(student_out), g.value(target), "distill_l1");
  return ops::mean(g, ops::abs(g, ops::sub(g, student_out, target)));
}

#define CUDI_INSTANTIATE_LOSSES(T)                                                               \
  template Var spatial_exposure_control<T>(Graph<T>&, Var, Var, std::size_t);                     \
  template Var spatial_consistency<T>(Graph<T>&, Var, Var, std::size_t);                          \
  template Var color_constancy<T>(Graph<T>&, Var);                                               \
  template Var illumination_smoothness<T>(Graph<T>&, Var, std::size_t, SmoothnessNorm);          \
  template TeacherLossTerms teacher_total<T>(Graph<T>&, Var, Var, Var, Var, std::size_t,          \
                                             const LossConfig&);                                 \
  template Var distill_l1<T>(Graph<T>&, Var, Var);

CUDI_INSTANTIATE_LOSSES(float)
CUDI_INSTANTIATE_LOSSES(double)

#undef CUDI_INSTANTIATE_LOSSES

}  // namespace cudi::losses
