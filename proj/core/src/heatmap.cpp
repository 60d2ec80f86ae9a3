#include "cudi/heatmap.hpp"

#include <algorithm>

#include "cudi/image_io.hpp"

namespace cudi {

DenseArray mean_plane(const DenseArray& values) {
  if (values.rank() < 2) throw ContractViolation("mean_plane: need at least two axes");
  const std::size_t h = values.dim(values.rank() - 2);
  const std::size_t w = values.dim(values.rank() - 1);
  const std::size_t plane = h * w;
  const std::size_t planes = values.size() / std::max<std::size_t>(plane, 1);
  std::vector<double> acc(plane, 0.0);
  for (std::size_t p = 0; p < planes; ++p) {
    const float* src = values.raw() + p * plane;
    for (std::size_t i = 0; i < plane; ++i) acc[i] += src[i];
  }
  DenseArray out(Shape{h, w});
  for (std::size_t i = 0; i < plane; ++i) out[i] = static_cast<float>(acc[i] / static_cast<double>(planes));
  return out;
}

Heatmap render_heatmap(const DenseArray& plane) {
  const DenseArray flat = mean_plane(plane);
  Heatmap hm{flat.dim(0), flat.dim(1), std::vector<std::uint8_t>(flat.size(), 0)};
  if (flat.empty()) return hm;
  const auto [lo_it, hi_it] = std::minmax_element(flat.values().begin(), flat.values().end());
  const double lo = *lo_it;
  const double range = static_cast<double>(*hi_it) - lo;
  if (!(range > 0.0)) return hm;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    hm.gray[i] = quantize8(static_cast<float>((flat[i] - lo) / range));
  }
  return hm;
}

Heatmap curve_heatmap(const CurveParamStack& params) { return render_heatmap(mean_plane(params.values)); }
Heatmap slope_heatmap(const TangentMaps& maps) { return render_heatmap(mean_plane(maps.slope)); }
Heatmap intercept_heatmap(const TangentMaps& maps) { return render_heatmap(mean_plane(maps.intercept)); }

void write_heatmap(const std::filesystem::path& path, const Heatmap& map) {
  write_file(path, encode_gray_png(map.gray, map.height, map.width));
}

}  // namespace cudi
