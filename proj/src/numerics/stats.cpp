#include "sanm/numerics/stats.hpp"

#include <algorithm>
#include <cmath>

namespace sanm {

TensorStats tensor_stats(const Tensor& x, const std::set<std::size_t>& axes) {
  if (axes.empty()) throw ShapeError("tensor_stats: empty axis set");
  for (auto a : axes) {
    if (a >= x.rank()) throw ShapeError("tensor_stats: axis " + std::to_string(a) + " out of range");
  }
  if (x.numel() == 0) throw ShapeError("tensor_stats: empty reduction");

  Shape kept;
  std::size_t reduced = 1;
  for (std::size_t a = 0; a < x.rank(); ++a) {
    if (axes.count(a)) {
      reduced *= x.dim(a);
    } else {
      kept.push_back(x.dim(a));
    }
  }
  if (reduced == 0) throw ShapeError("tensor_stats: empty reduction");

  // Row-major strides, then map every element to its output slot.
  const std::size_t rank = x.rank();
  std::vector<std::size_t> out_index(x.numel());
  {
    std::vector<std::size_t> coord(rank, 0);
    for (std::size_t flat = 0; flat < x.numel(); ++flat) {
      std::size_t o = 0;
      for (std::size_t a = 0; a < rank; ++a) {
        if (!axes.count(a)) o = o * x.dim(a) + coord[a];
      }
      out_index[flat] = o;
      for (std::size_t a = rank; a-- > 0;) {
        if (++coord[a] < x.dim(a)) break;
        coord[a] = 0;
      }
    }
  }

  Tensor mean(kept);
  Tensor var(kept);
  for (std::size_t i = 0; i < x.numel(); ++i) mean[out_index[i]] += x[i];
  for (auto& m : mean.data()) m /= static_cast<double>(reduced);
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double d = x[i] - mean[out_index[i]];
    var[out_index[i]] += d * d;
  }
  for (auto& v : var.data()) v = std::max(std::sqrt(v / static_cast<double>(reduced)), kStdFloor);
  return {std::move(mean), std::move(var)};
}

}  // namespace sanm
