#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cudi/image.hpp"

namespace cudi {

struct Corpus {
  std::vector<Image> images;
  std::vector<std::string> names;

  std::size_t size() const noexcept { return images.size(); }
  bool empty() const noexcept { return images.empty(); }
};

/// Every *.png directly inside `dir`, in lexicographic filename order.
/// Throws IngestionError for a missing/empty directory or any image smaller
/// than min_size on either axis.
Corpus load_corpus(const std::filesystem::path& dir, std::size_t min_size);

/// Throws IngestionError when empty or when an image is below min_size.
void validate_corpus(const Corpus& corpus, std::size_t min_size);

/// Procedural normal-brightness scene: smooth colored background, random
/// shapes with soft edges and mild texture, mean brightness near 0.5.
Image synthetic_image(std::size_t height, std::size_t width, std::uint64_t seed);

/// I^gamma, re-quantized to 8 bits.
Image apply_gamma(const Image& image, double gamma);

/// `count` synthetic images named synth_000.png, synth_001.png, ...
/// A positive `exposure_spread` re-exposes each image with gamma = 2^u,
/// u ~ U[-spread, spread], so the corpus spans dark to bright scenes.
Corpus synthetic_corpus(std::size_t count, std::size_t height, std::size_t width, std::uint64_t seed,
                        double exposure_spread = 0.0);

/// gain * I^gamma; gamma > 1 and gain < 1 give an underexposed copy.
Image underexpose(const Image& image, double gain = 0.45, double gamma = 1.8);

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

}  // namespace cudi
