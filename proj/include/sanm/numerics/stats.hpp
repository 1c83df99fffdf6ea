#pragma once

#include <set>

#include "sanm/numerics/tensor.hpp"

namespace sanm {

inline constexpr double kStdFloor = 1e-5;

struct TensorStats {
  Tensor mean;
  Tensor std;
};

// Population mean and standard deviation over `axes`. The result drops the
// reduced axes (reducing every axis gives rank-0 tensors). std is clamped
// below by kStdFloor. Throws ShapeError for an axis out of range, an empty
// axis set, or a reduction over zero elements.
TensorStats tensor_stats(const Tensor& x, const std::set<std::size_t>& axes);

}  // namespace sanm
