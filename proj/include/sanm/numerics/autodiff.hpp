#pragma once

// Reverse-mode automatic differentiation over Tensor values.
//
// A Tape records every primitive in execution order, which is a valid
// topological order. backprop() walks the tape once in reverse and never
// mutates it, so one recorded graph can be differentiated repeatedly.

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "sanm/numerics/tensor.hpp"

namespace sanm {

class Tape;

// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  std::uint32_t id() const { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t numel() const { return value().numel(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

struct BackwardArgs {
  const Tensor& grad;  // dL/d(output)
  const Tensor& out;   // forward output
  std::span<const Tensor* const> inputs;
  // Accumulators for dL/d(input); nullptr where the input needs no gradient.
  std::span<Tensor* const> input_grads;
};

using BackwardFn = std::function<void(const BackwardArgs&)>;

// Gradients of a scalar loss with respect to trainable leaves.
class GradMap {
 public:
  bool contains(Var v) const { return grads_.count(v.id()) != 0; }
  const Tensor& at(Var v) const;
  std::size_t size() const { return grads_.size(); }
  bool empty() const { return grads_.empty(); }

 private:
  friend class Tape;
  std::unordered_map<std::uint32_t, Tensor> grads_;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // A leaf. Trainable leaves receive gradients from backprop().
  Var leaf(Tensor value, bool trainable = false);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  // Records a primitive. `backward` is dropped when no parent needs a gradient.
  Var record(Tensor value, std::span<const Var> parents, BackwardFn backward);
  Var record(Tensor value, std::initializer_list<Var> parents, BackwardFn backward) {
    return record(std::move(value), std::span<const Var>(parents.begin(), parents.size()),
                  std::move(backward));
  }

  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  bool trainable(Var v) const { return nodes_[v.id()].trainable; }
  std::size_t size() const { return nodes_.size(); }

  // dLoss/dLeaf for every trainable leaf (zeros where the loss does not
  // depend on the leaf). Throws ShapeError unless `loss` holds one element.
  GradMap backprop(Var loss) const;

 private:
  struct Node {
    Tensor value;
    std::vector<std::uint32_t> parents;
    BackwardFn backward;
    bool requires_grad = false;
    bool trainable = false;
  };

  // deque: references returned by value() stay valid while recording.
  std::deque<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape_->value(*this); }

inline GradMap backprop(const Tape& tape, Var loss) { return tape.backprop(loss); }

// Differentiable primitives. Operands must share one tape.
namespace ad {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var neg(Var a);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);

Var square(Var a);
Var abs(Var a);
Var exp(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
Var silu(Var a);
Var relu(Var a);

Var sum(Var a);
Var mean(Var a);

Var reshape(Var a, Shape shape);
// out[j] = a.flat[indices[j]]; gradients scatter-add back.
Var gather(Var a, std::vector<std::size_t> indices, Shape shape);

// a[m,k] * b[k,n]
Var matmul(Var a, Var b);
Var transpose(Var a);
// x[m,n] + bias[n] broadcast over rows.
Var add_row(Var x, Var bias);
Var softmax_rows(Var x);
// Row-wise x / max(||x||, eps).
Var normalize_rows(Var x, double eps = 1e-8);

// Contiguous-chunk statistics: x is split into `groups` equal chunks in
// row-major order. Results have shape [groups].
Var group_mean(Var x, std::size_t groups);
// Population std, clamped below by `floor` (zero gradient when clamped).
Var group_std(Var x, std::size_t groups, double floor = 1e-5);
// Broadcasts v[groups] back over contiguous chunks of `shape`.
Var expand_groups(Var v, Shape shape);
// x[m,n] -> [groups, n], averaging each block of m/groups rows.
Var group_mean_rows(Var x, std::size_t groups);

// Multi-head scaled dot-product attention, fused.
// q: [q_groups*Tq, D]; k, v: [kv_groups*Tk, D] with kv_groups equal to
// q_groups or 1 (shared keys). Heads split the D columns evenly. Output has
// q's shape and concatenates heads along columns.
Var attention(Var q, Var k, Var v, std::size_t heads, std::size_t q_groups,
              std::size_t kv_groups);

}  // namespace ad

inline Var operator+(Var a, Var b) { return ad::add(a, b); }
inline Var operator-(Var a, Var b) { return ad::sub(a, b); }
inline Var operator*(Var a, Var b) { return ad::mul(a, b); }
inline Var operator/(Var a, Var b) { return ad::div(a, b); }
inline Var operator-(Var a) { return ad::neg(a); }
inline Var operator*(double s, Var a) { return ad::scale(a, s); }
inline Var operator*(Var a, double s) { return ad::scale(a, s); }

}  // namespace sanm
