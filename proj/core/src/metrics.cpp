#include "cudi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cudi {
namespace {

void same_dims(const Image& a, const Image& b, const char* what) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ContractViolation(std::string(what) + ": images differ in size");
  }
}

}  // namespace

const char* kernel_name(KernelKind kind) { return kind == KernelKind::iterative ? "iterative" : "linear"; }

std::uint64_t count_flops(KernelKind kind, std::size_t height, std::size_t width, std::size_t iterations) {
  const std::uint64_t elements = static_cast<std::uint64_t>(height) * width * 3;
  if (kind == KernelKind::linear) return 2 * elements;
  if (iterations == 0) throw ConfigError("count_flops: iteration count must be at least 1");
  return 4 * static_cast<std::uint64_t>(iterations) * elements;
}

double mse(const Image& a, const Image& b) {
  same_dims(a, b, "mse");
  const auto x = a.array().values();
  const auto y = b.array().values();
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - y[i];
    acc += d * d;
  }
  return acc / static_cast<double>(x.size());
}

double mean_abs_error(const Image& a, const Image& b) {
  same_dims(a, b, "mean_abs_error");
  const auto x = a.array().values();
  const auto y = b.array().values();
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::abs(static_cast<double>(x[i]) - y[i]);
  return acc / static_cast<double>(x.size());
}

double pcc(const Image& a, const Image& b) {
  same_dims(a, b, "pcc");
  const auto x = a.array().values();
  const auto y = b.array().values();
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw UndefinedStatistic("pcc: correlation of a constant image is undefined");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double region_mean_error(const Image& result, const ExposureMap& emap, std::size_t region) {
  if (result.height() != emap.height() || result.width() != emap.width()) {
    throw ContractViolation("region_mean_error: image and exposure map differ in size");
  }
  if (region == 0 || result.height() < region || result.width() < region) {
    throw ConfigError("region_mean_error: image smaller than one " + std::to_string(region) + "x" +
                      std::to_string(region) + " tile");
  }
  const std::size_t th = result.height() / region;
  const std::size_t tw = result.width() / region;
  const double tile_px = static_cast<double>(region * region);
  double total = 0.0;
  for (std::size_t ty = 0; ty < th; ++ty) {
    for (std::size_t tx = 0; tx < tw; ++tx) {
      double r = 0.0, e = 0.0;
      for (std::size_t y = ty * region; y < (ty + 1) * region; ++y) {
        for (std::size_t x = tx * region; x < (tx + 1) * region; ++x) {
          r += (static_cast<double>(result.at(0, y, x)) + result.at(1, y, x) + result.at(2, y, x)) / 3.0;
          e += emap.at(y, x);
        }
      }
      total += std::abs(r / tile_px - e / tile_px);
    }
  }
  return total / static_cast<double>(th * tw);
}

}  // namespace cudi
