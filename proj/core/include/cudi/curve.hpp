#pragma once

#include <cstddef>

#include "cudi/autograd.hpp"
#include "cudi/image.hpp"

namespace cudi {

inline constexpr std::size_t kDefaultCurveIterations = 8;

/// Per-pixel, per-iteration, per-channel curve magnitudes, shape (n,3,H,W),
/// values in [-1, 1].
struct CurveParamStack {
  DenseArray values;

  CurveParamStack() = default;
  explicit CurveParamStack(DenseArray v);
  CurveParamStack(std::size_t iterations, std::size_t height, std::size_t width, float fill = 0.0f);

  std::size_t iterations() const { return values.dim(0); }
  std::size_t height() const { return values.dim(2); }
  std::size_t width() const { return values.dim(3); }

  /// (3,H,W) slice for iteration j.
  DenseArray slice(std::size_t j) const;

  /// Unpacks item `index` of a (B,3n,H,W) network output.
  static CurveParamStack from_network_output(const DenseArray& batch, std::size_t index);
};

/// Slope and intercept maps of the tangent line, each (3,H,W).
struct TangentMaps {
  DenseArray slope;
  DenseArray intercept;

  std::size_t height() const { return slope.dim(1); }
  std::size_t width() const { return slope.dim(2); }

  /// Unpacks item `index` of a (B,6,H,W) student output (slope first).
  static TangentMaps from_network_output(const DenseArray& batch, std::size_t index);
};

/// I + alpha * I * (1 - I), elementwise.
Image le_step(const Image& image, const DenseArray& alpha);

/// n applications of le_step, one parameter slice per iteration. Throws
/// ConfigError for an empty stack.
Image apply_high_order(const Image& image, const CurveParamStack& params);

/// slope * I + intercept; clamped to [0,1] only when `clamp` is set.
Image apply_tangent(const Image& image, const TangentMaps& maps, bool clamp);

/// Closed-form tangent of the high-order curve at each pixel's own value:
/// k = prod_j (1 + a_j (1 - 2 y_{j-1})), b = y_n - k * I.
TangentMaps analytic_tangent(const Image& image, const CurveParamStack& params);

namespace curve {

/// Differentiable high-order curve on batches: image (B,3,H,W), params (B,3n,H,W).
template <typename T>
Var high_order(Graph<T>& g, Var image, Var params);

/// Differentiable tangent line, all operands (B,3,H,W); never clamps.
template <typename T>
Var tangent_line(Graph<T>& g, Var image, Var slope, Var intercept);

}  // namespace curve

}  // namespace cudi
