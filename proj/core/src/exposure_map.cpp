#include "cudi/exposure_map.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace cudi {
namespace {

// Portable uniform draw in [0,1): top 53 bits of the engine output.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

std::size_t uniform_index(std::mt19937_64& rng, std::size_t count) {
  return std::min(count - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(count)));
}

}  // namespace

ExposurePreset parse_preset(std::string_view name) {
  if (name == "under") return ExposurePreset::under;
  if (name == "over") return ExposurePreset::over;
  throw ContractViolation("unknown exposure preset '" + std::string(name) + "' (expected under|over)");
}

std::string_view preset_name(ExposurePreset preset) {
  return preset == ExposurePreset::under ? "under" : "over";
}

float preset_value(ExposurePreset preset) {
  return preset == ExposurePreset::under ? kUnderexposurePreset : kOverexposurePreset;
}

VariantMapConfig VariantMapConfig::for_preset(ExposurePreset preset) {
  VariantMapConfig cfg;
  cfg.base = preset == ExposurePreset::under ? 0.55 : 0.25;
  return cfg;
}

ExposureMap uniform_map(float value, std::size_t height, std::size_t width) {
  if (!(value >= 0.0f && value <= 1.0f)) {
    throw ContractViolation("uniform_map: value " + std::to_string(value) + " outside [0,1]");
  }
  return ExposureMap(height, width, value);
}

bool Region::contains(std::size_t y, std::size_t x) const {
  if (y < top || x < left || y >= top + height || x >= left + width) return false;
  if (shape == RegionShape::rectangle) return true;
  const double ry = static_cast<double>(height) / 2.0;
  const double rx = static_cast<double>(width) / 2.0;
  const double dy = (static_cast<double>(y - top) + 0.5 - ry) / ry;
  const double dx = (static_cast<double>(x - left) + 0.5 - rx) / rx;
  return dy * dy + dx * dx <= 1.0;
}

ExposureMap two_value_map(std::size_t height, std::size_t width, const Region& region, float inside,
                          float outside) {
  ExposureMap map(height, width, outside);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      if (region.contains(y, x)) map.at(y, x) = inside;
    }
  }
  return map;
}

ExposureMap sample_training_map(std::size_t height, std::size_t width, std::uint64_t seed) {
  if (height < 16 || width < 16) {
    throw ContractViolation("sample_training_map: map must be at least 16x16");
  }
  std::mt19937_64 rng(seed);
  Region region;
  region.shape = (rng() >> 63) != 0 ? RegionShape::ellipse : RegionShape::rectangle;
  auto span = [&rng](std::size_t extent) {
    const auto n = static_cast<std::size_t>(std::lround(uniform(rng, 0.1, 0.8) * static_cast<double>(extent)));
    return std::clamp<std::size_t>(n, 1, extent);
  };
  region.height = span(height);
  region.width = span(width);
  region.top = uniform_index(rng, height - region.height + 1);
  region.left = uniform_index(rng, width - region.width + 1);
  const auto inside = static_cast<float>(uniform(rng, kTrainingMapMin, kTrainingMapMax));
  const auto outside = static_cast<float>(uniform(rng, kTrainingMapMin, kTrainingMapMax));
  return two_value_map(height, width, region, inside, outside);
}

DenseArray normalize_to_pm1(const DenseArray& values) {
  DenseArray out(values.shape());
  if (values.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(values.values().begin(), values.values().end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) return out;
  const double range = hi - lo;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = static_cast<float>(2.0 * (static_cast<double>(values[i]) - lo) / range - 1.0);
  }
  return out;
}

ExposureMap variant_map(const Image& image, const VariantMapConfig& cfg) {
  const std::size_t plane = image.pixels();
  DenseArray deviation({image.height(), image.width()});
  const float* r = image.array().raw();
  const float* g = r + plane;
  const float* b = g + plane;
  std::vector<double> lum(plane);
  double avg = 0.0;
  for (std::size_t i = 0; i < plane; ++i) {
    lum[i] = cfg.luma_r * r[i] + cfg.luma_g * g[i] + cfg.luma_b * b[i];
    avg += lum[i];
  }
  avg /= static_cast<double>(std::max<std::size_t>(plane, 1));
  for (std::size_t i = 0; i < plane; ++i) deviation[i] = static_cast<float>(avg - lum[i]);
  const DenseArray norm = normalize_to_pm1(deviation);
  ExposureMap map(image.height(), image.width());
  for (std::size_t i = 0; i < plane; ++i) {
    map.array()[i] = static_cast<float>(std::clamp(cfg.base + cfg.amplitude * norm[i], 0.0, 1.0));
  }
  return map;
}

ExposureMap map_from_gray8(std::span<const std::uint8_t> samples, std::size_t height, std::size_t width) {
  if (samples.size() != height * width) {
    throw ContractViolation("map_from_gray8: expected " + std::to_string(height * width) + " samples, got " +
                            std::to_string(samples.size()));
  }
  ExposureMap map(height, width);
  for (std::size_t i = 0; i < samples.size(); ++i) map.array()[i] = static_cast<float>(samples[i]) / 255.0f;
  return map;
}

}  // namespace cudi
