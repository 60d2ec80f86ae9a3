#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cudi/tensor.hpp"

namespace cudi {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

inline constexpr double kTeacherLearningRate = 1e-4;
inline constexpr double kStudentLearningRate = 5e-4;

struct AdamState {
  AdamConfig config;
  std::int64_t step = 0;
  std::vector<DenseArray> first_moment;
  std::vector<DenseArray> second_moment;

  /// Zeroed moments shaped like `params`.
  static AdamState for_params(std::span<const DenseArray> params, AdamConfig config);
};

/// One bias-corrected Adam update of `params` in place. Throws
/// ContractViolation when params, adjoints and state disagree on shapes.
void adam_step(std::span<DenseArray> params, std::span<const DenseArray> adjoints, AdamState& state);

}  // namespace cudi
