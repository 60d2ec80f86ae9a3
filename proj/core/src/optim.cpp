#include "cudi/optim.hpp"

#include <cmath>
#include <string>

namespace cudi {

AdamState AdamState::for_params(std::span<const DenseArray> params, AdamConfig config) {
  if (!(config.learning_rate > 0.0)) throw ContractViolation("adam: learning rate must be positive");
  AdamState state;
  state.config = config;
  for (const DenseArray& p : params) {
    state.first_moment.emplace_back(p.shape());
    state.second_moment.emplace_back(p.shape());
  }
  return state;
}

void adam_step(std::span<DenseArray> params, std::span<const DenseArray> adjoints, AdamState& state) {
  if (params.size() != adjoints.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size()) {
    throw ContractViolation("adam_step: expected " + std::to_string(state.first_moment.size()) +
                            " parameter tensors, got " + std::to_string(params.size()) + " params and " +
                            std::to_string(adjoints.size()) + " adjoints");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_same_shape(params[i], adjoints[i], "adam_step");
    require_same_shape(params[i], state.first_moment[i], "adam_step");
  }

  const AdamConfig& cfg = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  const auto b1 = static_cast<float>(cfg.beta1);
  const auto b2 = static_cast<float>(cfg.beta2);

  for (std::size_t i = 0; i < params.size(); ++i) {
    float* p = params[i].raw();
    const float* g = adjoints[i].raw();
    float* m = state.first_moment[i].raw();
    float* v = state.second_moment[i].raw();
    for (std::size_t k = 0; k < params[i].size(); ++k) {
      m[k] = b1 * m[k] + (1.0f - b1) * g[k];
      v[k] = b2 * v[k] + (1.0f - b2) * g[k] * g[k];
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      p[k] -= static_cast<float>(cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon));
    }
  }
}

}  // namespace cudi
