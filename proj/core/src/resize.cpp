#include <algorithm>
#include <cmath>
#include <vector>

#include "kernels.hpp"

namespace cudi::detail {

std::vector<ResizeTap> resize_taps(std::size_t in, std::size_t out) {
  std::vector<ResizeTap> taps(out);
  const double ratio = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t o = 0; o < out; ++o) {
    double src = (static_cast<double>(o) + 0.5) * ratio - 0.5;
    src = std::max(src, 0.0);
    auto i0 = static_cast<std::size_t>(std::floor(src));
    i0 = std::min(i0, in - 1);
    const std::size_t i1 = std::min(i0 + 1, in - 1);
    const double frac = i0 == i1 ? 0.0 : src - static_cast<double>(i0);
    taps[o] = {i0, i1, 1.0 - frac, frac};
  }
  return taps;
}

template <typename T>
void resize_forward(const T* x, T* y, std::size_t planes, std::size_t in_h, std::size_t in_w,
                    const std::vector<ResizeTap>& rows, const std::vector<ResizeTap>& cols) {
  const std::size_t out_h = rows.size();
  const std::size_t out_w = cols.size();
  std::vector<double> tmp(in_h * out_w);
  for (std::size_t p = 0; p < planes; ++p) {
    const T* src = x + p * in_h * in_w;
    for (std::size_t r = 0; r < in_h; ++r) {
      const T* line = src + r * in_w;
      for (std::size_t c = 0; c < out_w; ++c) {
        const ResizeTap& t = cols[c];
        tmp[r * out_w + c] = t.w0 * line[t.i0] + t.w1 * line[t.i1];
      }
    }
    T* dst = y + p * out_h * out_w;
    for (std::size_t r = 0; r < out_h; ++r) {
      const ResizeTap& t = rows[r];
      const double* a = tmp.data() + t.i0 * out_w;
      const double* b = tmp.data() + t.i1 * out_w;
      for (std::size_t c = 0; c < out_w; ++c) {
        dst[r * out_w + c] = static_cast<T>(t.w0 * a[c] + t.w1 * b[c]);
      }
    }
  }
}

template <typename T>
void resize_backward(const T* dy, T* dx, std::size_t planes, std::size_t in_h, std::size_t in_w,
                     const std::vector<ResizeTap>& rows, const std::vector<ResizeTap>& cols) {
  const std::size_t out_h = rows.size();
  const std::size_t out_w = cols.size();
  std::vector<double> tmp(in_h * out_w);
  for (std::size_t p = 0; p < planes; ++p) {
    std::fill(tmp.begin(), tmp.end(), 0.0);
    const T* g = dy + p * out_h * out_w;
    for (std::size_t r = 0; r < out_h; ++r) {
      const ResizeTap& t = rows[r];
      double* a = tmp.data() + t.i0 * out_w;
      double* b = tmp.data() + t.i1 * out_w;
      for (std::size_t c = 0; c < out_w; ++c) {
        a[c] += t.w0 * g[r * out_w + c];
        b[c] += t.w1 * g[r * out_w + c];
      }
    }
    T* dst = dx + p * in_h * in_w;
    for (std::size_t r = 0; r < in_h; ++r) {
      T* line = dst + r * in_w;
      const double* src = tmp.data() + r * out_w;
      for (std::size_t c = 0; c < out_w; ++c) {
        const ResizeTap& t = cols[c];
        line[t.i0] += static_cast<T>(t.w0 * src[c]);
        line[t.i1] += static_cast<T>(t.w1 * src[c]);
      }
    }
  }
}

template void resize_forward<float>(const float*, float*, std::size_t, std::size_t, std::size_t,
                                    const std::vector<ResizeTap>&, const std::vector<ResizeTap>&);
template void resize_forward<double>(const double*, double*, std::size_t, std::size_t, std::size_t,
                                     const std::vector<ResizeTap>&, const std::vector<ResizeTap>&);
template void resize_backward<float>(const float*, float*, std::size_t, std::size_t, std::size_t,
                                     const std::vector<ResizeTap>&, const std::vector<ResizeTap>&);
template void resize_backward<double>(const double*, double*, std::size_t, std::size_t, std::size_t,
                                      const std::vector<ResizeTap>&, const std::vector<ResizeTap>&);

}  // namespace cudi::detail
