#pragma once

// Raw kernels behind the conv2d and resize ops. Not part of the installed API.

#include <cstddef>
#include <vector>

namespace cudi::detail {

struct ConvGeometry {
  std::size_t batch = 1;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t kernel = 1;
  std::size_t groups = 1;

  std::size_t in_per_group() const { return in_channels / groups; }
  std::size_t out_per_group() const { return out_channels / groups; }
  std::size_t pixels() const { return height * width; }
};

// Validates odd kernel, divisibility by groups; throws ConfigError.
void validate(const ConvGeometry& geo);

// y = conv(x, w) + b. `b` may be null. Overwrites y.
template <typename T>
void conv_forward(const T* x, const T* w, const T* b, T* y, const ConvGeometry& geo);

// Accumulates into any non-null gradient buffer.
template <typename T>
void conv_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, T* db, const ConvGeometry& geo);

struct ResizeTap {
  std::size_t i0 = 0;
  std::size_t i1 = 0;
  double w0 = 1.0;
  double w1 = 0.0;
};

// Half-pixel-center sampling taps for one axis.
std::vector<ResizeTap> resize_taps(std::size_t in, std::size_t out);

template <typename T>
void resize_forward(const T* x, T* y, std::size_t planes, std::size_t in_h, std::size_t in_w,
                    const std::vector<ResizeTap>& rows, const std::vector<ResizeTap>& cols);

// Transpose of resize_forward; accumulates into dx.
template <typename T>
void resize_backward(const T* dy, T* dx, std::size_t planes, std::size_t in_h, std::size_t in_w,
                     const std::vector<ResizeTap>& rows, const std::vector<ResizeTap>& cols);

}  // namespace cudi::detail
