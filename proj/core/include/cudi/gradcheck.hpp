#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "cudi/autograd.hpp"

namespace cudi {

/// Builds a scalar loss on `g` from the parameter node `params`.
template <typename T>
using LossBuilder = std::function<Var(Graph<T>& g, Var params)>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::size_t probes = 0;
};

inline constexpr double kFiniteDifferenceStep = 1e-3;

/// Compares backward() adjoints against central differences (default step
/// 1e-3, differences formed in double) at `probe_count` coordinates drawn without
/// replacement (all coordinates when probe_count >= params.size()).
/// Relative error is |a - fd| / max(|a|, |fd|, 1e-6). Throws NumericError when
/// the loss is not finite.
template <typename T>
GradCheckReport gradient_check(const LossBuilder<T>& loss, const Tensor<T>& params, std::size_t probe_count,
                               std::uint64_t seed = 0, double step = kFiniteDifferenceStep);

template <typename T>
double gradient_check_error(const LossBuilder<T>& loss, const Tensor<T>& params, std::size_t probe_count,
                            std::uint64_t seed = 0, double step = kFiniteDifferenceStep) {
  return gradient_check(loss, params, probe_count, seed, step).max_relative_error;
}

extern template GradCheckReport gradient_check<float>(const LossBuilder<float>&, const Tensor<float>&,
                                                      std::size_t, std::uint64_t, double);
extern template GradCheckReport gradient_check<double>(const LossBuilder<double>&, const Tensor<double>&,
                                                       std::size_t, std::uint64_t, double);

}  // namespace cudi
