#include "cudi/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace cudi {
namespace {

template <typename T>
double evaluate(const LossBuilder<T>& loss, const Tensor<T>& params) {
  Graph<T> g(false);
  const Var p = g.parameter(params);
  const double value = g.scalar(loss(g, p));
  if (!std::isfinite(value)) throw NumericError("gradient_check: loss is not finite");
  return value;
}

}  // namespace

template <typename T>
GradCheckReport gradient_check(const LossBuilder<T>& loss, const Tensor<T>& params, std::size_t probe_count,
                               std::uint64_t seed, double step) {
  if (!(step > 0.0)) throw ConfigError("gradient_check: step must be positive");
  for (T v : params.values()) {
    if (!std::isfinite(static_cast<double>(v))) throw NumericError("gradient_check: non-finite parameter");
  }

  Graph<T> g;
  const Var p = g.parameter(params);
  const Var l = loss(g, p);
  if (!std::isfinite(g.scalar(l))) throw NumericError("gradient_check: loss is not finite");
  g.backward(l);
  const Tensor<T> analytic = g.grad(p);

  std::vector<std::size_t> coords(params.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (probe_count < coords.size()) {
    std::mt19937_64 rng(seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(probe_count);
  }

  GradCheckReport report;
  report.probes = coords.size();
  Tensor<T> probe = params;
  for (std::size_t idx : coords) {
    const T original = probe[idx];
    // Divide by the step actually representable in T, not the nominal one.
    const T hi = static_cast<T>(static_cast<double>(original) + step);
    const T lo = static_cast<T>(static_cast<double>(original) - step);
    probe[idx] = hi;
    const double plus = evaluate(loss, probe);
    probe[idx] = lo;
    const double minus = evaluate(loss, probe);
    probe[idx] = original;
    const double numeric = (plus - minus) / (static_cast<double>(hi) - static_cast<double>(lo));
    const double a = static_cast<double>(analytic[idx]);
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
    const double err = std::abs(a - numeric) / denom;
    if (err >= report.max_relative_error) {
      report.max_relative_error = err;
      report.worst_index = idx;
      report.analytic_at_worst = a;
      report.numeric_at_worst = numeric;
    }
  }
  return report;
}

template GradCheckReport gradient_check<float>(const LossBuilder<float>&, const Tensor<float>&, std::size_t,
                                               std::uint64_t, double);
template GradCheckReport gradient_check<double>(const LossBuilder<double>&, const Tensor<double>&,
                                                std::size_t, std::uint64_t, double);

}  // namespace cudi
