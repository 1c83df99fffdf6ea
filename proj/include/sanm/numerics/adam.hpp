#pragma once

#include <cstddef>

#include "sanm/numerics/tensor.hpp"

namespace sanm {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Per-parameter Adam moments. Moments start at zero and take the parameter's
// shape on the first update.
struct AdamState {
  AdamConfig config;
  std::size_t step_count = 0;
  Tensor first_moment;
  Tensor second_moment;

  explicit AdamState(AdamConfig cfg = {}) : config(cfg) {}
};

// One bias-corrected Adam update of `param` in place. Throws ShapeError when
// grad and param shapes differ, or when the moments belong to another shape.
void adam_step(AdamState& state, Tensor& param, const Tensor& grad);

}  // namespace sanm
