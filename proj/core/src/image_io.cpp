#include "cudi/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "cudi/exposure_map.hpp"

namespace cudi {
namespace {

struct PngImage {
  png_image img;
  PngImage() {
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&img); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

std::vector<std::uint8_t> decode_raw(std::span<const std::uint8_t> bytes, png_uint_32 format, std::size_t& height,
                                     std::size_t& width) {
  if (bytes.empty()) throw ImageDecodeError("PNG decode: empty input");
  PngImage p;
  if (!png_image_begin_read_from_memory(&p.img, bytes.data(), bytes.size())) {
    throw ImageDecodeError(std::string("PNG decode: ") + p.img.message);
  }
  p.img.format = format;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(p.img));
  if (!png_image_finish_read(&p.img, nullptr, buf.data(), 0, nullptr)) {
    throw ImageDecodeError(std::string("PNG decode: ") + p.img.message);
  }
  height = p.img.height;
  width = p.img.width;
  if (height == 0 || width == 0) throw ImageDecodeError("PNG decode: empty image");
  return buf;
}

std::vector<std::uint8_t> encode_raw(const std::uint8_t* data, std::size_t height, std::size_t width,
                                     png_uint_32 format) {
  PngImage p;
  p.img.width = static_cast<png_uint_32>(width);
  p.img.height = static_cast<png_uint_32>(height);
  p.img.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&p.img, nullptr, &size, 0, data, 0, nullptr)) {
    throw ImageDecodeError(std::string("PNG encode: ") + p.img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&p.img, out.data(), &size, 0, data, 0, nullptr)) {
    throw ImageDecodeError(std::string("PNG encode: ") + p.img.message);
  }
  out.resize(size);
  return out;
}

}  // namespace

std::uint8_t quantize8(float v) {
  const double c = std::clamp(static_cast<double>(v), 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(c * 255.0 + 0.5));
}

Image decode_png(std::span<const std::uint8_t> bytes) {
  std::size_t h = 0, w = 0;
  const auto rgb = decode_raw(bytes, PNG_FORMAT_RGB, h, w);
  Image image(h, w);
  float* dst = image.array().raw();
  const std::size_t plane = h * w;
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < 3; ++c) dst[c * plane + i] = static_cast<float>(rgb[3 * i + c]) / 255.0f;
  }
  return image;
}

Image read_png(const std::filesystem::path& path) {
  try {
    return decode_png(read_file(path));
  } catch (const ImageDecodeError& e) {
    throw ImageDecodeError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  const std::size_t plane = image.pixels();
  std::vector<std::uint8_t> rgb(plane * 3);
  const float* src = image.array().raw();
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < 3; ++c) rgb[3 * i + c] = quantize8(src[c * plane + i]);
  }
  return encode_raw(rgb.data(), image.height(), image.width(), PNG_FORMAT_RGB);
}

void write_png(const std::filesystem::path& path, const Image& image) { write_file(path, encode_png(image)); }

ExposureMap decode_map_png(std::span<const std::uint8_t> bytes) {
  std::size_t h = 0, w = 0;
  const auto gray = decode_raw(bytes, PNG_FORMAT_GRAY, h, w);
  return map_from_gray8(gray, h, w);
}

ExposureMap read_map_png(const std::filesystem::path& path) {
  try {
    return decode_map_png(read_file(path));
  } catch (const ImageDecodeError& e) {
    throw ImageDecodeError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_gray_png(std::span<const std::uint8_t> samples, std::size_t height,
                                          std::size_t width) {
  if (samples.size() != height * width) throw ContractViolation("encode_gray_png: sample count mismatch");
  return encode_raw(samples.data(), height, width, PNG_FORMAT_GRAY);
}

std::vector<std::uint8_t> encode_map_png(const ExposureMap& map) {
  std::vector<std::uint8_t> gray(map.array().size());
  std::transform(map.array().values().begin(), map.array().values().end(), gray.begin(), quantize8);
  return encode_gray_png(gray, map.height(), map.width());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageDecodeError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

}  // namespace cudi
