#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cudi/image.hpp"

namespace cudi {

/// 8-bit quantization used on export: clamp to [0,1], then round half up.
std::uint8_t quantize8(float v);

/// Decodes any PNG libpng understands into unit-interval RGB. Grayscale is
/// replicated, alpha is dropped, 16-bit is reduced to 8-bit.
Image decode_png(std::span<const std::uint8_t> bytes);
Image read_png(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const Image& image);
void write_png(const std::filesystem::path& path, const Image& image);

/// Painted exposure maps: grayscale samples / 255. Color input is converted
/// to gray by libpng.
ExposureMap decode_map_png(std::span<const std::uint8_t> bytes);
ExposureMap read_map_png(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_gray_png(std::span<const std::uint8_t> samples, std::size_t height,
                                          std::size_t width);
std::vector<std::uint8_t> encode_map_png(const ExposureMap& map);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace cudi
