#include <Eigen/Core>

#include <algorithm>
#include <string>
#include <vector>

#include "cudi/errors.hpp"
#include "kernels.hpp"

namespace cudi::detail {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

// Range of output columns x for which x + dx stays inside [0, width).
struct Span1D {
  long begin;
  long end;
};

Span1D valid_range(long size, long offset) {
  return {std::max(0L, -offset), std::min(size, size - offset)};
}

template <typename T>
void im2col(const T* src, std::size_t channels, std::size_t height, std::size_t width,
            std::size_t k, T* col) {
  const long h = static_cast<long>(height);
  const long w = static_cast<long>(width);
  const long pad = static_cast<long>(k / 2);
  const std::size_t plane = height * width;
  for (std::size_t c = 0; c < channels; ++c) {
    const T* in = src + c * plane;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        T* row = col + ((c * k + ky) * k + kx) * plane;
        const long dy = static_cast<long>(ky) - pad;
        const long dx = static_cast<long>(kx) - pad;
        const Span1D xs = valid_range(w, dx);
        for (long y = 0; y < h; ++y) {
          T* dst = row + y * w;
          const long sy = y + dy;
          if (sy < 0 || sy >= h || xs.begin >= xs.end) {
            std::fill(dst, dst + w, T(0));
            continue;
          }
          std::fill(dst, dst + xs.begin, T(0));
          std::copy(in + sy * w + xs.begin + dx, in + sy * w + xs.end + dx, dst + xs.begin);
          std::fill(dst + xs.end, dst + w, T(0));
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* col, std::size_t channels, std::size_t height, std::size_t width,
            std::size_t k, T* dst) {
  const long h = static_cast<long>(height);
  const long w = static_cast<long>(width);
  const long pad = static_cast<long>(k / 2);
  const std::size_t plane = height * width;
  for (std::size_t c = 0; c < channels; ++c) {
    T* out = dst + c * plane;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const T* row = col + ((c * k + ky) * k + kx) * plane;
        const long dy = static_cast<long>(ky) - pad;
        const long dx = static_cast<long>(kx) - pad;
        const Span1D xs = valid_range(w, dx);
        for (long y = 0; y < h; ++y) {
          const long sy = y + dy;
          if (sy < 0 || sy >= h) continue;
          const T* src = row + y * w;
          T* o = out + sy * w + dx;
          for (long x = xs.begin; x < xs.end; ++x) o[x] += src[x];
        }
      }
    }
  }
}

template <typename T>
void depthwise_forward(const T* x, const T* w, const T* b, T* y, const ConvGeometry& geo) {
  const long h = static_cast<long>(geo.height);
  const long wd = static_cast<long>(geo.width);
  const long pad = static_cast<long>(geo.kernel / 2);
  const std::size_t plane = geo.pixels();
  const std::size_t kk = geo.kernel * geo.kernel;
  for (std::size_t n = 0; n < geo.batch; ++n) {
    for (std::size_t c = 0; c < geo.in_channels; ++c) {
      const T* xp = x + (n * geo.in_channels + c) * plane;
      T* yp = y + (n * geo.out_channels + c) * plane;
      std::fill(yp, yp + plane, b ? b[c] : T(0));
      const T* wk = w + c * kk;
      for (std::size_t ky = 0; ky < geo.kernel; ++ky) {
        for (std::size_t kx = 0; kx < geo.kernel; ++kx) {
          const T wv = wk[ky * geo.kernel + kx];
          const long dy = static_cast<long>(ky) - pad;
          const long dx = static_cast<long>(kx) - pad;
          const Span1D ys = valid_range(h, dy);
          const Span1D xs = valid_range(wd, dx);
          for (long yy = ys.begin; yy < ys.end; ++yy) {
            T* orow = yp + yy * wd;
            const T* irow = xp + (yy + dy) * wd + dx;
            for (long xx = xs.begin; xx < xs.end; ++xx) orow[xx] += wv * irow[xx];
          }
        }
      }
    }
  }
}

template <typename T>
void depthwise_backward(const T* x, const T* w, const T* dy_all, T* dx_all, T* dw, T* db,
                        const ConvGeometry& geo) {
  const long h = static_cast<long>(geo.height);
  const long wd = static_cast<long>(geo.width);
  const long pad = static_cast<long>(geo.kernel / 2);
  const std::size_t plane = geo.pixels();
  const std::size_t kk = geo.kernel * geo.kernel;
  for (std::size_t c = 0; c < geo.in_channels; ++c) {
    const T* wk = w + c * kk;
    double bias_acc = 0.0;
    std::vector<double> w_acc(kk, 0.0);
    for (std::size_t n = 0; n < geo.batch; ++n) {
      const T* xp = x + (n * geo.in_channels + c) * plane;
      const T* gp = dy_all + (n * geo.out_channels + c) * plane;
      T* dxp = dx_all ? dx_all + (n * geo.in_channels + c) * plane : nullptr;
      if (db) {
        for (std::size_t i = 0; i < plane; ++i) bias_acc += gp[i];
      }
      for (std::size_t ky = 0; ky < geo.kernel; ++ky) {
        for (std::size_t kx = 0; kx < geo.kernel; ++kx) {
          const std::size_t t = ky * geo.kernel + kx;
          const T wv = wk[t];
          const long dy = static_cast<long>(ky) - pad;
          const long dx = static_cast<long>(kx) - pad;
          const Span1D ys = valid_range(h, dy);
          const Span1D xs = valid_range(wd, dx);
          double acc = 0.0;
          for (long yy = ys.begin; yy < ys.end; ++yy) {
            const T* grow = gp + yy * wd;
            const T* irow = xp + (yy + dy) * wd + dx;
            T* drow = dxp ? dxp + (yy + dy) * wd + dx : nullptr;
            for (long xx = xs.begin; xx < xs.end; ++xx) {
              acc += static_cast<double>(grow[xx]) * irow[xx];
              if (drow) drow[xx] += wv * grow[xx];
            }
          }
          w_acc[t] += acc;
        }
      }
    }
    if (dw) {
      for (std::size_t t = 0; t < kk; ++t) dw[c * kk + t] += static_cast<T>(w_acc[t]);
    }
    if (db) db[c] += static_cast<T>(bias_acc);
  }
}

bool is_depthwise(const ConvGeometry& geo) {
  return geo.in_per_group() == 1 && geo.out_per_group() == 1;
}

}  // namespace

void validate(const ConvGeometry& geo) {
  if (geo.kernel % 2 == 0) {
    throw ConfigError("conv2d: kernel size must be odd, got " + std::to_string(geo.kernel));
  }
  if (geo.groups == 0 || geo.in_channels % geo.groups != 0 || geo.out_channels % geo.groups != 0) {
    throw ConfigError("conv2d: channels " + std::to_string(geo.in_channels) + "->" +
                      std::to_string(geo.out_channels) + " not divisible by groups " +
                      std::to_string(geo.groups));
  }
  if (geo.height == 0 || geo.width == 0) throw ConfigError("conv2d: empty spatial extent");
}

template <typename T>
void conv_forward(const T* x, const T* w, const T* b, T* y, const ConvGeometry& geo) {
  if (is_depthwise(geo)) {
    depthwise_forward(x, w, b, y, geo);
    return;
  }
  const std::size_t cin_g = geo.in_per_group();
  const std::size_t cout_g = geo.out_per_group();
  const std::size_t kdim = cin_g * geo.kernel * geo.kernel;
  const std::size_t plane = geo.pixels();
  const auto hw = static_cast<Eigen::Index>(plane);
  std::vector<T> col(geo.kernel == 1 ? 0 : kdim * plane);

  for (std::size_t n = 0; n < geo.batch; ++n) {
    for (std::size_t gi = 0; gi < geo.groups; ++gi) {
      const T* xin = x + (n * geo.in_channels + gi * cin_g) * plane;
      const T* cols = xin;
      if (geo.kernel != 1) {
        im2col(xin, cin_g, geo.height, geo.width, geo.kernel, col.data());
        cols = col.data();
      }
      ConstMatMap<T> wm(w + gi * cout_g * kdim, static_cast<Eigen::Index>(cout_g),
                        static_cast<Eigen::Index>(kdim));
      ConstMatMap<T> cm(cols, static_cast<Eigen::Index>(kdim), hw);
      T* yout = y + (n * geo.out_channels + gi * cout_g) * plane;
      MatMap<T> ym(yout, static_cast<Eigen::Index>(cout_g), hw);
      ym.noalias() = wm * cm;
      if (b) {
        for (std::size_t o = 0; o < cout_g; ++o) {
          ym.row(static_cast<Eigen::Index>(o)).array() += b[gi * cout_g + o];
        }
      }
    }
  }
}

template <typename T>
void conv_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, T* db, const ConvGeometry& geo) {
  if (is_depthwise(geo)) {
    depthwise_backward(x, w, dy, dx, dw, db, geo);
    return;
  }
  const std::size_t cin_g = geo.in_per_group();
  const std::size_t cout_g = geo.out_per_group();
  const std::size_t kdim = cin_g * geo.kernel * geo.kernel;
  const std::size_t plane = geo.pixels();
  const auto hw = static_cast<Eigen::Index>(plane);
  const auto rows_out = static_cast<Eigen::Index>(cout_g);
  const auto rows_k = static_cast<Eigen::Index>(kdim);
  std::vector<T> col(geo.kernel == 1 ? 0 : kdim * plane);
  RowMat<T> dcol;

  if (db) {
    for (std::size_t o = 0; o < geo.out_channels; ++o) {
      double acc = 0.0;
      for (std::size_t n = 0; n < geo.batch; ++n) {
        const T* g = dy + (n * geo.out_channels + o) * plane;
        for (std::size_t i = 0; i < plane; ++i) acc += g[i];
      }
      db[o] += static_cast<T>(acc);
    }
  }

  for (std::size_t n = 0; n < geo.batch; ++n) {
    for (std::size_t gi = 0; gi < geo.groups; ++gi) {
      const T* xin = x + (n * geo.in_channels + gi * cin_g) * plane;
      ConstMatMap<T> gm(dy + (n * geo.out_channels + gi * cout_g) * plane, rows_out, hw);
      ConstMatMap<T> wm(w + gi * cout_g * kdim, rows_out, rows_k);
      if (dw) {
        const T* cols = xin;
        if (geo.kernel != 1) {
          im2col(xin, cin_g, geo.height, geo.width, geo.kernel, col.data());
          cols = col.data();
        }
        ConstMatMap<T> cm(cols, rows_k, hw);
        MatMap<T> dwm(dw + gi * cout_g * kdim, rows_out, rows_k);
        dwm.noalias() += gm * cm.transpose();
      }
      if (dx) {
        T* dxin = dx + (n * geo.in_channels + gi * cin_g) * plane;
        if (geo.kernel == 1) {
          MatMap<T> dxm(dxin, rows_k, hw);
          dxm.noalias() += wm.transpose() * gm;
        } else {
          dcol.noalias() = wm.transpose() * gm;
          col2im(dcol.data(), cin_g, geo.height, geo.width, geo.kernel, dxin);
        }
      }
    }
  }
}

template void conv_forward<float>(const float*, const float*, const float*, float*, const ConvGeometry&);
template void conv_forward<double>(const double*, const double*, const double*, double*,
                                   const ConvGeometry&);
template void conv_backward<float>(const float*, const float*, const float*, float*, float*, float*,
                                   const ConvGeometry&);
template void conv_backward<double>(const double*, const double*, const double*, double*, double*,
                                    double*, const ConvGeometry&);

}  // namespace cudi::detail
