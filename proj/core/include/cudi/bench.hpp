#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "cudi/metrics.hpp"

namespace cudi {

/// Input, parameter and output buffers for one kernel at a given size.
/// Values are drawn deterministically from valid ranges (I in [0,1],
/// alpha in [-1,1], K in [0,2], B in [-0.5,0.5]).
struct KernelBuffers {
  std::size_t elements = 0;
  std::size_t iterations = 0;
  std::vector<float> input;
  std::vector<float> params;  // iterative: n * elements; linear: 2 * elements (K then B)
  std::vector<float> output;

  static KernelBuffers make(KernelKind kind, std::size_t height, std::size_t width, std::size_t iterations = 8,
                            std::uint64_t seed = 0);
};

/// One evaluation of the kernel over the buffers, split across `threads`
/// contiguous chunks. The iterative kernel makes n full passes.
void run_kernel(KernelKind kind, KernelBuffers& buffers, std::size_t threads = 1);

struct BenchResult {
  KernelKind kind = KernelKind::linear;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t threads = 1;
  std::uint64_t median_ns = 0;
  std::uint64_t flops = 0;
  std::vector<std::uint64_t> samples_ns;
};

/// Median wall time of `repetitions` timed runs after one untimed warm-up.
BenchResult time_op(KernelKind kind, std::size_t height, std::size_t width, std::size_t repetitions,
                    std::size_t threads = 1, std::size_t iterations = 8);

inline constexpr const char* kBenchCsvHeader = "kind,height,width,threads,median_ns,flops";

std::string bench_csv_row(const BenchResult& r);
void write_bench_csv(std::ostream& out, const std::vector<BenchResult>& rows);

}  // namespace cudi
