#include "cudi/pipeline.hpp"

#include <chrono>
#include <string>

#include "cudi/metrics.hpp"

namespace cudi {

Engine parse_engine(std::string_view name) {
  if (name == "teacher") return Engine::teacher;
  if (name == "student") return Engine::student;
  throw ContractViolation("unknown engine '" + std::string(name) + "' (expected teacher|student)");
}

std::string_view engine_name(Engine engine) { return engine == Engine::teacher ? "teacher" : "student"; }

ExposureMap build_exposure_map(const Image& image, const ExposureSpec& spec) {
  if (const auto* u = std::get_if<UniformExposure>(&spec)) return uniform_map(u->value, image.height(), image.width());
  if (const auto* a = std::get_if<AutoExposure>(&spec)) {
    return variant_map(image, VariantMapConfig::for_preset(a->preset));
  }
  const ExposureMap& painted = std::get<PaintedExposure>(spec).map;
  if (painted.height() != image.height() || painted.width() != image.width()) {
    throw ContractViolation("exposure map is " + std::to_string(painted.height()) + "x" +
                            std::to_string(painted.width()) + " but the image is " +
                            std::to_string(image.height()) + "x" + std::to_string(image.width()));
  }
  return painted;
}

AdjustResult adjust(const AdjustRequest& request, const Model& model) {
  const auto t0 = std::chrono::steady_clock::now();
  const Image& image = request.image;
  if (image.pixels() == 0) throw ContractViolation("adjust: empty image");
  AdjustResult out;
  out.exposure_map = build_exposure_map(image, request.exposure);

  if (request.engine == Engine::teacher) {
    const auto* net = std::get_if<TeacherNet>(&model);
    if (net == nullptr) throw RoleMismatch("engine 'teacher' needs a teacher checkpoint, got a student");
    CurveParamStack params = request.identity_curve
                                 ? CurveParamStack(net->config().iterations, image.height(), image.width(), 0.0f)
                                 : net->predict(image, out.exposure_map);
    out.image = apply_high_order(image, params);
    if (request.keep_maps) out.curve_params = std::move(params);
  } else {
    const auto* net = std::get_if<StudentNet>(&model);
    if (net == nullptr) throw RoleMismatch("engine 'student' needs a student checkpoint, got a teacher");
    TangentMaps maps;
    if (request.identity_curve) {
      maps.slope = DenseArray(Shape{3, image.height(), image.width()}, 1.0f);
      maps.intercept = DenseArray(Shape{3, image.height(), image.width()}, 0.0f);
    } else {
      maps = net->predict(image, out.exposure_map);
    }
    out.image = apply_tangent(image, maps, true);
    if (request.keep_maps) out.tangent_maps = std::move(maps);
  }

  out.stats.mean_brightness = out.image.mean();
  if (image.height() >= 16 && image.width() >= 16) {
    out.stats.region_mean_error = region_mean_error(out.image, out.exposure_map);
  }
  out.stats.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace cudi
