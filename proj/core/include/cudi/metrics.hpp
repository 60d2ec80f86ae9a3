#pragma once

#include <cstddef>
#include <cstdint>

#include "cudi/image.hpp"

namespace cudi {

enum class KernelKind { iterative, linear };

const char* kernel_name(KernelKind kind);

/// Elementwise op count: iterative 4*n*H*W*3, linear 2*H*W*3. ConfigError
/// for n = 0 on the iterative kernel.
std::uint64_t count_flops(KernelKind kind, std::size_t height, std::size_t width,
                          std::size_t iterations = 8);

/// Mean squared difference over all elements.
double mse(const Image& a, const Image& b);
double mean_abs_error(const Image& a, const Image& b);

/// Pearson correlation of the flattened images. UndefinedStatistic when
/// either input is constant.
double pcc(const Image& a, const Image& b);

/// Graph-free mirror of the spatial exposure control loss for one image.
double region_mean_error(const Image& result, const ExposureMap& emap, std::size_t region = 16);

}  // namespace cudi
