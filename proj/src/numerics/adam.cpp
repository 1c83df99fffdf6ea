#include "sanm/numerics/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace sanm {

void adam_step(AdamState& state, Tensor& param, const Tensor& grad) {
  require_same_shape(param, grad, "adam_step");
  const auto& cfg = state.config;
  if (!(cfg.lr >= 0.0) || !(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0) ||
      !(cfg.eps > 0.0)) {
    throw std::invalid_argument("adam_step: invalid hyperparameters");
  }
  if (state.first_moment.empty()) {
    state.first_moment = Tensor(param.shape());
    state.second_moment = Tensor(param.shape());
  }
  require_same_shape(param, state.first_moment, "adam_step moments");

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < param.numel(); ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad[i];
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    param[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

}  // namespace sanm
