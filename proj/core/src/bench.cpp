#include "cudi/bench.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <thread>

namespace cudi {
namespace {

template <typename Fn>
void parallel_chunks(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    fn(std::size_t{0}, count);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads - 1);
  const std::size_t chunk = (count + threads - 1) / threads;
  for (std::size_t t = 1; t < threads; ++t) {
    const std::size_t lo = std::min(count, t * chunk);
    const std::size_t hi = std::min(count, lo + chunk);
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  fn(std::size_t{0}, std::min(count, chunk));
}

void iterative(const float* x, const float* alpha, float* y, std::size_t elements, std::size_t n,
               std::size_t lo, std::size_t hi) {
  const float* a0 = alpha;
  for (std::size_t i = lo; i < hi; ++i) y[i] = x[i] + a0[i] * x[i] * (1.0f - x[i]);
  for (std::size_t j = 1; j < n; ++j) {
    const float* a = alpha + j * elements;
    for (std::size_t i = lo; i < hi; ++i) y[i] = y[i] + a[i] * y[i] * (1.0f - y[i]);
  }
}

void linear(const float* x, const float* k, const float* b, float* y, std::size_t lo, std::size_t hi) {
  for (std::size_t i = lo; i < hi; ++i) y[i] = k[i] * x[i] + b[i];
}

}  // namespace

KernelBuffers KernelBuffers::make(KernelKind kind, std::size_t height, std::size_t width, std::size_t iterations,
                                  std::uint64_t seed) {
  if (kind == KernelKind::iterative && iterations == 0) throw ConfigError("kernel buffers: n must be at least 1");
  KernelBuffers buf;
  buf.elements = height * width * 3;
  buf.iterations = kind == KernelKind::iterative ? iterations : 1;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  buf.input.resize(buf.elements);
  for (float& v : buf.input) v = unit(rng);
  if (kind == KernelKind::iterative) {
    std::uniform_real_distribution<float> alpha(-1.0f, 1.0f);
    buf.params.resize(iterations * buf.elements);
    for (float& v : buf.params) v = alpha(rng);
  } else {
    std::uniform_real_distribution<float> slope(0.0f, 2.0f);
    std::uniform_real_distribution<float> intercept(-0.5f, 0.5f);
    buf.params.resize(2 * buf.elements);
    for (std::size_t i = 0; i < buf.elements; ++i) buf.params[i] = slope(rng);
    for (std::size_t i = 0; i < buf.elements; ++i) buf.params[buf.elements + i] = intercept(rng);
  }
  buf.output.assign(buf.elements, 0.0f);
  return buf;
}

void run_kernel(KernelKind kind, KernelBuffers& buf, std::size_t threads) {
  const std::size_t e = buf.elements;
  if (kind == KernelKind::iterative) {
    if (buf.params.size() != buf.iterations * e) throw ContractViolation("run_kernel: iterative buffers malformed");
    parallel_chunks(e, threads, [&](std::size_t lo, std::size_t hi) {
      iterative(buf.input.data(), buf.params.data(), buf.output.data(), e, buf.iterations, lo, hi);
    });
  } else {
    if (buf.params.size() != 2 * e) throw ContractViolation("run_kernel: linear buffers malformed");
    parallel_chunks(e, threads, [&](std::size_t lo, std::size_t hi) {
      linear(buf.input.data(), buf.params.data(), buf.params.data() + e, buf.output.data(), lo, hi);
    });
  }
}

BenchResult time_op(KernelKind kind, std::size_t height, std::size_t width, std::size_t repetitions,
                    std::size_t threads, std::size_t iterations) {
  if (repetitions == 0) throw ConfigError("time_op: repetitions must be at least 1");
  KernelBuffers buf = KernelBuffers::make(kind, height, width, iterations);
  BenchResult r;
  r.kind = kind;
  r.height = height;
  r.width = width;
  r.threads = std::max<std::size_t>(threads, 1);
  r.flops = count_flops(kind, height, width, iterations);
  run_kernel(kind, buf, r.threads);
  for (std::size_t i = 0; i < repetitions; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    run_kernel(kind, buf, r.threads);
    const auto t1 = std::chrono::steady_clock::now();
    r.samples_ns.push_back(
        static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()));
  }
  std::vector<std::uint64_t> sorted = r.samples_ns;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  r.median_ns = m % 2 == 1 ? sorted[m / 2] : (sorted[m / 2 - 1] + sorted[m / 2]) / 2;
  return r;
}

std::string bench_csv_row(const BenchResult& r) {
  return std::string(kernel_name(r.kind)) + ',' + std::to_string(r.height) + ',' + std::to_string(r.width) + ',' +
         std::to_string(r.threads) + ',' + std::to_string(r.median_ns) + ',' + std::to_string(r.flops);
}

void write_bench_csv(std::ostream& out, const std::vector<BenchResult>& rows) {
  out << kBenchCsvHeader << '\n';
  for (const auto& r : rows) out << bench_csv_row(r) << '\n';
}

}  // namespace cudi
