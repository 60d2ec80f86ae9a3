#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cudi/curve.hpp"

namespace cudi {

/// Single-channel 8-bit visualization of a parameter map.
struct Heatmap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> gray;
};

/// Min-max normalizes an (H,W) or (1,H,W) array to [0,1] and quantizes.
/// A constant map renders as all zeros.
Heatmap render_heatmap(const DenseArray& plane);

/// Per-pixel mean over the leading axes: (...,H,W) -> (H,W).
DenseArray mean_plane(const DenseArray& values);

/// A averaged over iterations and channels.
Heatmap curve_heatmap(const CurveParamStack& params);
/// K and B averaged over channels.
Heatmap slope_heatmap(const TangentMaps& maps);
Heatmap intercept_heatmap(const TangentMaps& maps);

void write_heatmap(const std::filesystem::path& path, const Heatmap& map);

}  // namespace cudi
