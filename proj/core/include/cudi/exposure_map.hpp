#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "cudi/image.hpp"

namespace cudi {

inline constexpr float kUnderexposurePreset = 0.65f;
inline constexpr float kOverexposurePreset = 0.2f;
inline constexpr float kTrainingMapMin = 0.2f;
inline constexpr float kTrainingMapMax = 0.8f;

enum class ExposurePreset { under, over };

/// Parses "under" / "over"; throws ContractViolation otherwise.
ExposurePreset parse_preset(std::string_view name);
std::string_view preset_name(ExposurePreset preset);

/// Uniform value for a named preset (0.65 under, 0.2 over).
float preset_value(ExposurePreset preset);

/// Settings of the luminance-driven spatially variant map.
struct VariantMapConfig {
  double base = 0.55;       // S
  double amplitude = 0.15;  // A
  double luma_r = 0.299;
  double luma_g = 0.587;
  double luma_b = 0.114;

  static VariantMapConfig for_preset(ExposurePreset preset);
};

/// Constant map; throws ContractViolation for values outside [0,1].
ExposureMap uniform_map(float value, std::size_t height, std::size_t width);

enum class RegionShape { rectangle, ellipse };

/// Axis-aligned rectangle or inscribed ellipse, in pixel coordinates
/// [top, top+height) x [left, left+width).
struct Region {
  RegionShape shape = RegionShape::rectangle;
  std::size_t top = 0;
  std::size_t left = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  bool contains(std::size_t y, std::size_t x) const;
};

/// `inside` on the region, `outside` elsewhere.
ExposureMap two_value_map(std::size_t height, std::size_t width, const Region& region, float inside,
                          float outside);

/// Training map: one random rectangle-or-ellipse region (each axis 10-80% of
/// the image, uniformly placed) and its complement, each filled with an
/// independent uniform value in [0.2, 0.8]. Deterministic per seed.
/// Requires at least 16x16.
ExposureMap sample_training_map(std::size_t height, std::size_t width, std::uint64_t seed);

/// Affine min-max map onto [-1, 1]; a constant input maps to zeros.
DenseArray normalize_to_pm1(const DenseArray& values);

/// S + A * normalize_to_pm1(mean(L) - L), clamped to [0,1].
ExposureMap variant_map(const Image& image, const VariantMapConfig& cfg);

/// 8-bit grayscale samples mapped to [0,1] by division by 255.
ExposureMap map_from_gray8(std::span<const std::uint8_t> samples, std::size_t height, std::size_t width);

}  // namespace cudi
