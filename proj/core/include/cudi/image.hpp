#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cudi/tensor.hpp"

namespace cudi {

/// 3 x H x W RGB image with unit-interval intensities.
class Image {
 public:
  static constexpr std::size_t kChannels = 3;

  Image() = default;
  Image(std::size_t height, std::size_t width, float fill = 0.0f);
  explicit Image(DenseArray chw);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t pixels() const noexcept { return height_ * width_; }

  const DenseArray& array() const noexcept { return data_; }
  DenseArray& array() noexcept { return data_; }

  float& at(std::size_t c, std::size_t y, std::size_t x) { return data_[(c * height_ + y) * width_ + x]; }
  float at(std::size_t c, std::size_t y, std::size_t x) const { return data_[(c * height_ + y) * width_ + x]; }

  double mean() const;

  bool operator==(const Image&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  DenseArray data_;
};

/// 1 x H x W control map of target brightness values.
class ExposureMap {
 public:
  ExposureMap() = default;
  ExposureMap(std::size_t height, std::size_t width, float fill = 0.0f);
  explicit ExposureMap(DenseArray hw_or_chw);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }

  const DenseArray& array() const noexcept { return data_; }
  DenseArray& array() noexcept { return data_; }

  float& at(std::size_t y, std::size_t x) { return data_[y * width_ + x]; }
  float at(std::size_t y, std::size_t x) const { return data_[y * width_ + x]; }

  bool operator==(const ExposureMap&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  DenseArray data_;
};

/// Rec.601 luma per pixel, as an H x W array.
DenseArray luma(const Image& image);

/// (B,3,H,W) batch from equally sized images.
DenseArray stack_images(std::span<const Image> images);
/// (B,1,H,W) batch from equally sized maps.
DenseArray stack_maps(std::span<const ExposureMap> maps);
/// Element `index` of a (B,C,H,W) batch as a (C,H,W) array.
DenseArray unstack(const DenseArray& batch, std::size_t index);

}  // namespace cudi
