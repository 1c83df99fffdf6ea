#pragma once

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>

#include "sanm/numerics/autodiff.hpp"
#include "sanm/numerics/rng.hpp"

namespace sanm::models {

// Puts model weights on a tape, once per weight tensor. Weights are trainable
// leaves when the binder is trainable, constants otherwise.
class ParamBinder {
 public:
  explicit ParamBinder(Tape& tape, bool trainable = false) : tape_(&tape), trainable_(trainable) {}

  Var operator()(const Tensor& weight);
  std::optional<Var> find(const Tensor& weight) const;

  Tape& tape() const { return *tape_; }
  bool trainable() const { return trainable_; }

 private:
  Tape* tape_;
  bool trainable_;
  std::unordered_map<const Tensor*, Var> bound_;
};

using ParamVisitor = std::function<void(const std::string& name, Tensor& value)>;
using ConstParamVisitor = std::function<void(const std::string& name, const Tensor& value)>;

// N(0, gain^2 / fan_in) entries.
Tensor init_weight(SeededRng& rng, std::size_t fan_in, std::size_t fan_out, double gain = 1.0);

// x[m,in] * w[in,out] + b[out]
Var linear(ParamBinder& bind, Var x, const Tensor& w, const Tensor& b);

}  // namespace sanm::models
