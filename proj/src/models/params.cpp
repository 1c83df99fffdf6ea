#include "sanm/models/params.hpp"

#include <cmath>

namespace sanm::models {

Var ParamBinder::operator()(const Tensor& weight) {
  auto it = bound_.find(&weight);
  if (it != bound_.end()) return it->second;
  Var v = tape_->leaf(weight, trainable_);
  bound_.emplace(&weight, v);
  return v;
}

std::optional<Var> ParamBinder::find(const Tensor& weight) const {
  auto it = bound_.find(&weight);
  if (it == bound_.end()) return std::nullopt;
  return it->second;
}

Tensor init_weight(SeededRng& rng, std::size_t fan_in, std::size_t fan_out, double gain) {
  return gaussian_sample(rng, {fan_in, fan_out}, gain / std::sqrt(static_cast<double>(fan_in)));
}

Var linear(ParamBinder& bind, Var x, const Tensor& w, const Tensor& b) {
  return ad::add_row(ad::matmul(x, bind(w)), bind(b));
}

}  // namespace sanm::models
