#include "cudi/image.hpp"

#include <algorithm>
#include <string>

namespace cudi {

Image::Image(std::size_t height, std::size_t width, float fill)
    : height_(height), width_(width), data_({kChannels, height, width}, fill) {}

Image::Image(DenseArray chw) {
  if (chw.rank() != 3 || chw.dim(0) != kChannels) {
    throw ContractViolation("image: expected 3xHxW array, got " + shape_string(chw.shape()));
  }
  height_ = chw.dim(1);
  width_ = chw.dim(2);
  data_ = std::move(chw);
}

double Image::mean() const {
  if (data_.empty()) return 0.0;
  double acc = 0.0;
  for (float v : data_.values()) acc += v;
  return acc / static_cast<double>(data_.size());
}

ExposureMap::ExposureMap(std::size_t height, std::size_t width, float fill)
    : height_(height), width_(width), data_({1, height, width}, fill) {}

ExposureMap::ExposureMap(DenseArray hw_or_chw) {
  if (hw_or_chw.rank() == 2) {
    hw_or_chw = std::move(hw_or_chw).reshaped({1, hw_or_chw.dim(0), hw_or_chw.dim(1)});
  }
  if (hw_or_chw.rank() != 3 || hw_or_chw.dim(0) != 1) {
    throw ContractViolation("exposure map: expected HxW or 1xHxW array, got " +
                            shape_string(hw_or_chw.shape()));
  }
  height_ = hw_or_chw.dim(1);
  width_ = hw_or_chw.dim(2);
  data_ = std::move(hw_or_chw);
}

DenseArray luma(const Image& image) {
  DenseArray out({image.height(), image.width()});
  const std::size_t plane = image.pixels();
  const float* r = image.array().raw();
  const float* g = r + plane;
  const float* b = g + plane;
  for (std::size_t i = 0; i < plane; ++i) {
    out[i] = static_cast<float>(0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i]);
  }
  return out;
}

namespace {

template <typename Item>
DenseArray stack_arrays(std::span<const Item> items, std::size_t channels, const char* what) {
  if (items.empty()) throw ContractViolation(std::string(what) + ": empty batch");
  const std::size_t h = items.front().height();
  const std::size_t w = items.front().width();
  DenseArray out = DenseArray::nchw(items.size(), channels, h, w);
  const std::size_t stride = channels * h * w;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].height() != h || items[i].width() != w) {
      throw ContractViolation(std::string(what) + ": batch items differ in size");
    }
    std::copy_n(items[i].array().raw(), stride, out.raw() + i * stride);
  }
  return out;
}

}  // namespace

DenseArray stack_images(std::span<const Image> images) {
  return stack_arrays(images, Image::kChannels, "stack_images");
}

DenseArray stack_maps(std::span<const ExposureMap> maps) { return stack_arrays(maps, 1, "stack_maps"); }

DenseArray unstack(const DenseArray& batch, std::size_t index) {
  if (batch.rank() != 4 || index >= batch.batch()) {
    throw ContractViolation("unstack: index " + std::to_string(index) + " out of range for " +
                            shape_string(batch.shape()));
  }
  const std::size_t stride = batch.channels() * batch.height() * batch.width();
  std::vector<float> data(batch.raw() + index * stride, batch.raw() + (index + 1) * stride);
  return DenseArray({batch.channels(), batch.height(), batch.width()}, std::move(data));
}

}  // namespace cudi
