#pragma once

#include <optional>
#include <string_view>
#include <variant>

#include "cudi/checkpoint.hpp"
#include "cudi/curve.hpp"
#include "cudi/exposure_map.hpp"
#include "cudi/image.hpp"

namespace cudi {

enum class Engine { teacher, student };

/// "teacher" / "student"; ContractViolation otherwise.
Engine parse_engine(std::string_view name);
std::string_view engine_name(Engine engine);

struct UniformExposure {
  float value = 0.5f;
};
struct AutoExposure {
  ExposurePreset preset = ExposurePreset::under;
};
struct PaintedExposure {
  ExposureMap map;
};
using ExposureSpec = std::variant<UniformExposure, AutoExposure, PaintedExposure>;

struct AdjustRequest {
  Image image;
  Engine engine = Engine::student;
  ExposureSpec exposure;
  bool identity_curve = false;  // skip the network: A = 0, or K = 1 and B = 0
  bool keep_maps = false;
};

struct AdjustStats {
  std::optional<double> region_mean_error;  // absent for images under one 16x16 tile
  double mean_brightness = 0.0;
  double elapsed_ms = 0.0;
};

struct AdjustResult {
  Image image;
  ExposureMap exposure_map;
  AdjustStats stats;
  std::optional<CurveParamStack> curve_params;
  std::optional<TangentMaps> tangent_maps;
};

/// ContractViolation when a painted map's dims differ from the image or a
/// uniform value leaves [0,1].
ExposureMap build_exposure_map(const Image& image, const ExposureSpec& spec);

/// Teacher engine: high-order curve; student engine: clamped tangent line.
/// RoleMismatch when the model does not serve the requested engine.
AdjustResult adjust(const AdjustRequest& request, const Model& model);

}  // namespace cudi
