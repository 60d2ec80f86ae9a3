#include "cudi/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "cudi/image_io.hpp"

namespace cudi {
namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

}  // namespace

void validate_corpus(const Corpus& corpus, std::size_t min_size) {
  if (corpus.empty()) throw IngestionError("corpus is empty");
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Image& im = corpus.images[i];
    if (im.height() < min_size || im.width() < min_size) {
      const std::string name = i < corpus.names.size() ? corpus.names[i] : std::to_string(i);
      throw IngestionError("corpus image " + name + " is " + std::to_string(im.height()) + "x" +
                           std::to_string(im.width()) + ", smaller than the " + std::to_string(min_size) +
                           " patch");
    }
  }
}

Corpus load_corpus(const std::filesystem::path& dir, std::size_t min_size) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IngestionError("corpus directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  Corpus corpus;
  for (const auto& f : files) {
    try {
      corpus.images.push_back(read_png(f));
    } catch (const ImageDecodeError& e) {
      throw IngestionError(e.what());
    }
    corpus.names.push_back(f.filename().string());
  }
  if (corpus.empty()) throw IngestionError("no PNG images in " + dir.string());
  validate_corpus(corpus, min_size);
  return corpus;
}

Image apply_gamma(const Image& image, double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("apply_gamma: gamma must be positive");
  Image out = image;
  for (float& v : out.array().values()) {
    v = static_cast<float>(quantize8(static_cast<float>(std::pow(std::clamp<double>(v, 0.0, 1.0), gamma)))) / 255.0f;
  }
  return out;
}

Image synthetic_image(std::size_t height, std::size_t width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double h = static_cast<double>(height);
  const double w = static_cast<double>(width);
  Image image(height, width);

  // Background: two-color linear gradient at a random angle.
  double c0[3], c1[3];
  for (int c = 0; c < 3; ++c) {
    c0[c] = uniform(rng, 0.2, 0.8);
    c1[c] = uniform(rng, 0.2, 0.8);
  }
  const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double u = ((static_cast<double>(x) / w - 0.5) * ca + (static_cast<double>(y) / h - 0.5) * sa) + 0.5;
      const double t = std::clamp(u, 0.0, 1.0);
      for (int c = 0; c < 3; ++c) image.at(c, y, x) = static_cast<float>(c0[c] + (c1[c] - c0[c]) * t);
    }
  }

  // Soft-edged ellipses and rectangles.
  const int shapes = 4 + static_cast<int>(rng() % 6);
  for (int s = 0; s < shapes; ++s) {
    const bool ellipse = (rng() & 1) != 0;
    const double cy = uniform(rng, 0.0, h), cx = uniform(rng, 0.0, w);
    const double ry = uniform(rng, 0.05, 0.3) * h, rx = uniform(rng, 0.05, 0.3) * w;
    const double soft = uniform(rng, 0.02, 0.2);
    double color[3];
    for (double& c : color) c = uniform(rng, 0.05, 0.95);
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        const double dy = (static_cast<double>(y) + 0.5 - cy) / ry;
        const double dx = (static_cast<double>(x) + 0.5 - cx) / rx;
        const double d = ellipse ? std::sqrt(dy * dy + dx * dx) : std::max(std::abs(dy), std::abs(dx));
        const double a = 1.0 - smoothstep(1.0 - soft, 1.0 + soft, d);
        if (a <= 0.0) continue;
        for (int c = 0; c < 3; ++c) {
          float& v = image.at(c, y, x);
          v = static_cast<float>(v * (1.0 - a) + color[c] * a);
        }
      }
    }
  }

  // Sinusoidal texture plus small noise.
  const double fy = uniform(rng, 2.0, 12.0), fx = uniform(rng, 2.0, 12.0);
  const double amp = uniform(rng, 0.0, 0.06);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double tex = amp * std::sin(2.0 * std::numbers::pi * (fy * static_cast<double>(y) / h)) *
                         std::cos(2.0 * std::numbers::pi * (fx * static_cast<double>(x) / w));
      for (int c = 0; c < 3; ++c) {
        float& v = image.at(c, y, x);
        v = static_cast<float>(v + tex + noise(rng));
      }
    }
  }

  // Pull the mean towards 0.5 and quantize like a stored 8-bit image.
  const double shift = 0.5 - image.mean();
  for (float& v : image.array().values()) {
    v = static_cast<float>(quantize8(static_cast<float>(v + 0.7 * shift))) / 255.0f;
  }
  return image;
}

Corpus synthetic_corpus(std::size_t count, std::size_t height, std::size_t width, std::uint64_t seed,
                        double exposure_spread) {
  if (!(exposure_spread >= 0.0)) throw ConfigError("synthetic_corpus: exposure spread must be non-negative");
  Corpus corpus;
  std::vector<std::uint64_t> seeds(count);
  std::mt19937_64 rng(seed);
  for (auto& s : seeds) s = rng();
  std::mt19937_64 exposure_rng(seed ^ 0x65787073ULL);
  for (std::size_t i = 0; i < count; ++i) {
    Image im = synthetic_image(height, width, seeds[i]);
    if (exposure_spread > 0.0) {
      im = apply_gamma(im, std::exp2(uniform(exposure_rng, -exposure_spread, exposure_spread)));
    }
    corpus.images.push_back(std::move(im));
    char name[32];
    std::snprintf(name, sizeof name, "synth_%03zu.png", i);
    corpus.names.emplace_back(name);
  }
  return corpus;
}

Image underexpose(const Image& image, double gain, double gamma) {
  Image out = image;
  for (float& v : out.array().values()) {
    v = static_cast<float>(quantize8(static_cast<float>(gain * std::pow(static_cast<double>(v), gamma)))) /
        255.0f;
  }
  return out;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < corpus.size(); ++i) write_png(dir / corpus.names[i], corpus.images[i]);
}

}  // namespace cudi
