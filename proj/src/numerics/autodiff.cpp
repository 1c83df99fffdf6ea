#include "sanm/numerics/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sanm/kernels.hpp"

namespace sanm {

const Tensor& GradMap::at(Var v) const {
  auto it = grads_.find(v.id());
  if (it == grads_.end()) throw std::out_of_range("no gradient for node " + std::to_string(v.id()));
  return it->second;
}

Var Tape::leaf(Tensor value, bool trainable) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = trainable;
  node.trainable = trainable;
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::record(Tensor value, std::span<const Var> parents, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  node.parents.reserve(parents.size());
  for (const Var& p : parents) {
    if (&p.tape() != this) throw std::invalid_argument("autodiff: operands live on different tapes");
    node.parents.push_back(p.id());
    node.requires_grad = node.requires_grad || nodes_[p.id()].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

GradMap Tape::backprop(Var loss) const {
  if (&loss.tape() != this) throw std::invalid_argument("backprop: loss recorded on another tape");
  if (value(loss).numel() != 1) throw ShapeError("backprop requires scalar");

  std::vector<Tensor> grads(nodes_.size());
  grads[loss.id()] = Tensor(value(loss).shape(), 1.0);

  std::vector<const Tensor*> inputs;
  std::vector<Tensor*> input_grads;
  for (std::size_t idx = loss.id() + 1; idx-- > 0;) {
    const Node& node = nodes_[idx];
    if (!node.backward || grads[idx].empty()) continue;
    inputs.clear();
    input_grads.clear();
    for (auto p : node.parents) {
      inputs.push_back(&nodes_[p].value);
      if (nodes_[p].requires_grad) {
        if (grads[p].empty()) grads[p] = Tensor(nodes_[p].value.shape());
        input_grads.push_back(&grads[p]);
      } else {
        input_grads.push_back(nullptr);
      }
    }
    node.backward(BackwardArgs{grads[idx], node.value, inputs, input_grads});
    // Interior gradients are no longer needed once propagated.
    if (!node.trainable) grads[idx] = Tensor();
  }

  GradMap out;
  for (std::size_t idx = 0; idx < nodes_.size(); ++idx) {
    if (!nodes_[idx].trainable) continue;
    out.grads_.emplace(static_cast<std::uint32_t>(idx),
                       grads[idx].empty() ? Tensor(nodes_[idx].value.shape())
                                          : std::move(grads[idx]));
  }
  return out;
}

namespace ad {
namespace {

Tape& common_tape(Var a, Var b) {
  if (&a.tape() != &b.tape()) throw std::invalid_argument("autodiff: operands live on different tapes");
  return a.tape();
}

template <class F, class G>
Var unary(Var a, F forward, G derivative) {
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) y[i] = forward(x[i]);
  return a.tape().record(std::move(y), {a}, [derivative](const BackwardArgs& args) {
    Tensor& gx = *args.input_grads[0];
    const Tensor& x = *args.inputs[0];
    for (std::size_t i = 0; i < x.numel(); ++i) gx[i] += args.grad[i] * derivative(x[i], args.out[i]);
  });
}

void accumulate(Tensor* target, const Tensor& g, double s = 1.0) {
  if (target) kernels::active().axpy(s, g.raw(), target->raw(), g.numel());
}

}  // namespace

Var add(Var a, Var b) {
  Tape& tape = common_tape(a, b);
  require_same_shape(a.value(), b.value(), "add");
  return tape.record(a.value() + b.value(), {a, b}, [](const BackwardArgs& args) {
    accumulate(args.input_grads[0], args.grad);
    accumulate(args.input_grads[1], args.grad);
  });
}

Var sub(Var a, Var b) {
  Tape& tape = common_tape(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  return tape.record(a.value() - b.value(), {a, b}, [](const BackwardArgs& args) {
    accumulate(args.input_grads[0], args.grad);
    accumulate(args.input_grads[1], args.grad, -1.0);
  });
}

Var mul(Var a, Var b) {
  Tape& tape = common_tape(a, b);
  return tape.record(hadamard(a.value(), b.value()), {a, b}, [](const BackwardArgs& args) {
    const auto& k = kernels::active();
    const std::size_t n = args.grad.numel();
    Tensor tmp(args.grad.shape());
    if (args.input_grads[0]) {
      k.mul(args.grad.raw(), args.inputs[1]->raw(), tmp.raw(), n);
      accumulate(args.input_grads[0], tmp);
    }
    if (args.input_grads[1]) {
      k.mul(args.grad.raw(), args.inputs[0]->raw(), tmp.raw(), n);
      accumulate(args.input_grads[1], tmp);
    }
  });
}

Var div(Var a, Var b) {
  Tape& tape = common_tape(a, b);
  require_same_shape(a.value(), b.value(), "div");
  Tensor y(a.value().shape());
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = a.value()[i] / b.value()[i];
  return tape.record(std::move(y), {a, b}, [](const BackwardArgs& args) {
    const Tensor& den = *args.inputs[1];
    for (std::size_t i = 0; i < args.grad.numel(); ++i) {
      if (args.input_grads[0]) (*args.input_grads[0])[i] += args.grad[i] / den[i];
      if (args.input_grads[1]) (*args.input_grads[1])[i] -= args.grad[i] * args.out[i] / den[i];
    }
  });
}

Var neg(Var a) { return scale(a, -1.0); }

Var scale(Var a, double s) {
  return a.tape().record(a.value() * s, {a}, [s](const BackwardArgs& args) {
    accumulate(args.input_grads[0], args.grad, s);
  });
}

Var add_scalar(Var a, double s) {
  Tensor y = a.value();
  for (auto& v : y.data()) v += s;
  return a.tape().record(std::move(y), {a}, [](const BackwardArgs& args) {
    accumulate(args.input_grads[0], args.grad);
  });
}

Var square(Var a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var abs(Var a) {
  return unary(
      a, [](double x) { return std::abs(x); },
      [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var exp(Var a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var tanh(Var a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var silu(Var a) {
  return unary(
      a, [](double x) { return x / (1.0 + std::exp(-x)); },
      [](double x, double) {
        const double s = 1.0 / (1.0 + std::exp(-x));
        return s * (1.0 + x * (1.0 - s));
      });
}

Var relu(Var a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sum(Var a) {
  return a.tape().record(Tensor::scalar(sanm::sum(a.value())), {a}, [](const BackwardArgs& args) {
    Tensor& g = *args.input_grads[0];
    const double s = args.grad[0];
    for (auto& v : g.data()) v += s;
  });
}

Var mean(Var a) {
  const std::size_t n = a.numel();
  if (n == 0) throw ShapeError("mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var reshape(Var a, Shape shape) {
  Tensor y = a.value().reshaped(std::move(shape));
  return a.tape().record(std::move(y), {a}, [](const BackwardArgs& args) {
    kernels::active().axpy(1.0, args.grad.raw(), args.input_grads[0]->raw(), args.grad.numel());
  });
}

Var gather(Var a, std::vector<std::size_t> indices, Shape shape) {
  if (shape_numel(shape) != indices.size()) throw ShapeError("gather: index count does not match shape");
  const Tensor& x = a.value();
  Tensor y(std::move(shape));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] >= x.numel()) throw ShapeError("gather: index out of range");
    y[j] = x[indices[j]];
  }
  return a.tape().record(std::move(y), {a}, [idx = std::move(indices)](const BackwardArgs& args) {
    Tensor& g = *args.input_grads[0];
    for (std::size_t j = 0; j < idx.size(); ++j) g[idx[j]] += args.grad[j];
  });
}

Var matmul(Var a, Var b) {
  Tape& tape = common_tape(a, b);
  Tensor c = sanm::matmul(a.value(), b.value());
  return tape.record(std::move(c), {a, b}, [](const BackwardArgs& args) {
    const Tensor& A = *args.inputs[0];
    const Tensor& B = *args.inputs[1];
    const std::size_t m = A.dim(0), k = A.dim(1), n = B.dim(1);
    if (args.input_grads[0]) kernels::gemm_nt(args.grad.raw(), B.raw(), args.input_grads[0]->raw(), m, n, k);
    if (args.input_grads[1]) kernels::gemm_tn(A.raw(), args.grad.raw(), args.input_grads[1]->raw(), m, k, n);
  });
}

Var transpose(Var a) {
  return a.tape().record(sanm::transpose(a.value()), {a}, [](const BackwardArgs& args) {
    *args.input_grads[0] += sanm::transpose(args.grad);
  });
}

Var add_row(Var x, Var bias) {
  Tape& tape = common_tape(x, bias);
  const Tensor& X = x.value();
  const Tensor& b = bias.value();
  if (X.rank() != 2 || b.numel() != X.dim(1)) {
    throw ShapeError("add_row: " + shape_str(X.shape()) + " + " + shape_str(b.shape()));
  }
  const std::size_t m = X.dim(0), n = X.dim(1);
  Tensor y = X;
  for (std::size_t i = 0; i < m; ++i) kernels::active().add(y.raw() + i * n, b.raw(), y.raw() + i * n, n);
  return tape.record(std::move(y), {x, bias}, [m, n](const BackwardArgs& args) {
    accumulate(args.input_grads[0], args.grad);
    if (Tensor* gb = args.input_grads[1]) {
      for (std::size_t i = 0; i < m; ++i) kernels::active().axpy(1.0, args.grad.raw() + i * n, gb->raw(), n);
    }
  });
}

Var softmax_rows(Var x) {
  const Tensor& X = x.value();
  if (X.rank() != 2) throw ShapeError("softmax_rows: rank-2 tensor required");
  const std::size_t m = X.dim(0), n = X.dim(1);
  Tensor y(X.shape());
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = X.raw() + i * n;
    double* out = y.raw() + i * n;
    const double mx = *std::max_element(row, row + n);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += (out[j] = std::exp(row[j] - mx));
    for (std::size_t j = 0; j < n; ++j) out[j] /= z;
  }
  return x.tape().record(std::move(y), {x}, [m, n](const BackwardArgs& args) {
    Tensor& g = *args.input_grads[0];
    for (std::size_t i = 0; i < m; ++i) {
      const double* p = args.out.raw() + i * n;
      const double* dy = args.grad.raw() + i * n;
      const double inner = kernels::active().dot(p, dy, n);
      for (std::size_t j = 0; j < n; ++j) g[i * n + j] += p[j] * (dy[j] - inner);
    }
  });
}

Var normalize_rows(Var x, double eps) {
  const Tensor& X = x.value();
  if (X.rank() != 2) throw ShapeError("normalize_rows: rank-2 tensor required");
  const std::size_t m = X.dim(0), n = X.dim(1);
  Tensor y(X.shape());
  std::vector<double> norms(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = X.raw() + i * n;
    norms[i] = std::max(std::sqrt(kernels::active().dot(row, row, n)), eps);
    for (std::size_t j = 0; j < n; ++j) y[i * n + j] = row[j] / norms[i];
  }
  return x.tape().record(std::move(y), {x}, [m, n, eps, norms = std::move(norms)](const BackwardArgs& args) {
    Tensor& g = *args.input_grads[0];
    for (std::size_t i = 0; i < m; ++i) {
      const double* yi = args.out.raw() + i * n;
      const double* dy = args.grad.raw() + i * n;
      if (norms[i] > eps) {
        const double inner = kernels::active().dot(yi, dy, n);
        for (std::size_t j = 0; j < n; ++j) g[i * n + j] += (dy[j] - yi[j] * inner) / norms[i];
      } else {
        for (std::size_t j = 0; j < n; ++j) g[i * n + j] += dy[j] / eps;
      }
    }
  });
}

namespace {

std::size_t chunk_size(const Tensor& x, std::size_t groups, const char* what) {
  if (groups == 0 || x.numel() == 0 || x.numel() % groups != 0) {
    throw ShapeError(std::string(what) + ": " + shape_str(x.shape()) + " not divisible into " +
                     std::to_string(groups) + " groups");
  }
  return x.numel() / groups;
}

}  // namespace

Var group_mean(Var x, std::size_t groups) {
  const std::size_t c = chunk_size(x.value(), groups, "group_mean");
  Tensor y({groups});
  for (std::size_t g = 0; g < groups; ++g) {
    y[g] = kernels::active().sum(x.value().raw() + g * c, c) / static_cast<double>(c);
  }
  return x.tape().record(std::move(y), {x}, [groups, c](const BackwardArgs& args) {
    Tensor& gx = *args.input_grads[0];
    for (std::size_t g = 0; g < groups; ++g) {
      const double s = args.grad[g] / static_cast<double>(c);
      for (std::size_t j = 0; j < c; ++j) gx[g * c + j] += s;
    }
  });
}

Var group_std(Var x, std::size_t groups, double floor) {
  const Tensor& X = x.value();
  const std::size_t c = chunk_size(X, groups, "group_std");
  Tensor y({groups});
  std::vector<double> means(groups);
  std::vector<bool> clamped(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    const double* p = X.raw() + g * c;
    const double mu = kernels::active().sum(p, c) / static_cast<double>(c);
    double ss = 0.0;
    for (std::size_t j = 0; j < c; ++j) ss += (p[j] - mu) * (p[j] - mu);
    const double sd = std::sqrt(ss / static_cast<double>(c));
    means[g] = mu;
    clamped[g] = !(sd > floor);
    y[g] = clamped[g] ? floor : sd;
  }
  return x.tape().record(
      std::move(y), {x},
      [groups, c, means = std::move(means), clamped = std::move(clamped)](const BackwardArgs& args) {
        Tensor& gx = *args.input_grads[0];
        const Tensor& X = *args.inputs[0];
        for (std::size_t g = 0; g < groups; ++g) {
          if (clamped[g]) continue;
          const double s = args.grad[g] / (static_cast<double>(c) * args.out[g]);
          for (std::size_t j = 0; j < c; ++j) gx[g * c + j] += s * (X[g * c + j] - means[g]);
        }
      });
}

Var expand_groups(Var v, Shape shape) {
  const std::size_t groups = v.numel();
  const std::size_t total = shape_numel(shape);
  if (groups == 0 || total % groups != 0) {
    throw ShapeError("expand_groups: " + std::to_string(groups) + " groups into " + shape_str(shape));
  }
  const std::size_t c = total / groups;
  Tensor y(std::move(shape));
  for (std::size_t g = 0; g < groups; ++g) std::fill_n(y.raw() + g * c, c, v.value()[g]);
  return v.tape().record(std::move(y), {v}, [groups, c](const BackwardArgs& args) {
    Tensor& gv = *args.input_grads[0];
    for (std::size_t g = 0; g < groups; ++g) gv[g] += kernels::active().sum(args.grad.raw() + g * c, c);
  });
}

Var group_mean_rows(Var x, std::size_t groups) {
  const Tensor& X = x.value();
  if (X.rank() != 2 || groups == 0 || X.dim(0) % groups != 0) {
    throw ShapeError("group_mean_rows: " + shape_str(X.shape()) + " into " + std::to_string(groups));
  }
  const std::size_t rows = X.dim(0) / groups, n = X.dim(1);
  const double inv = 1.0 / static_cast<double>(rows);
  Tensor y({groups, n});
  for (std::size_t g = 0; g < groups; ++g)
    for (std::size_t r = 0; r < rows; ++r)
      kernels::active().axpy(inv, X.raw() + (g * rows + r) * n, y.raw() + g * n, n);
  return x.tape().record(std::move(y), {x}, [groups, rows, n, inv](const BackwardArgs& args) {
    Tensor& gx = *args.input_grads[0];
    for (std::size_t g = 0; g < groups; ++g)
      for (std::size_t r = 0; r < rows; ++r)
        kernels::active().axpy(inv, args.grad.raw() + g * n, gx.raw() + (g * rows + r) * n, n);
  });
}

Var attention(Var q, Var k, Var v, std::size_t heads, std::size_t q_groups, std::size_t kv_groups) {
  Tape& tape = common_tape(q, k);
  common_tape(k, v);
  const Tensor& Q = q.value();
  const Tensor& K = k.value();
  const Tensor& V = v.value();
  if (Q.rank() != 2 || K.rank() != 2 || V.rank() != 2 || K.shape() != V.shape() || Q.dim(1) != K.dim(1)) {
    throw ShapeError("attention: q " + shape_str(Q.shape()) + ", k " + shape_str(K.shape()) + ", v " +
                     shape_str(V.shape()));
  }
  const std::size_t D = Q.dim(1);
  if (heads == 0 || D % heads != 0) throw ShapeError("attention: model dim not divisible by heads");
  if (q_groups == 0 || Q.dim(0) % q_groups != 0) throw ShapeError("attention: bad query groups");
  if (!(kv_groups == 1 || kv_groups == q_groups) || K.dim(0) % kv_groups != 0 || K.dim(0) == 0) {
    throw ShapeError("attention: key groups must be 1 or match query groups");
  }
  const std::size_t tq = Q.dim(0) / q_groups, tk = K.dim(0) / kv_groups, dh = D / heads;
  const double sc = 1.0 / std::sqrt(static_cast<double>(dh));
  const auto& kt = kernels::active();

  // probs layout: [group][head][query][key]
  std::vector<double> probs(q_groups * heads * tq * tk);
  Tensor out(Q.shape());
  for (std::size_t g = 0; g < q_groups; ++g) {
    const std::size_t kg = kv_groups == 1 ? 0 : g;
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t i = 0; i < tq; ++i) {
        const double* qi = Q.raw() + (g * tq + i) * D + h * dh;
        double* p = probs.data() + ((g * heads + h) * tq + i) * tk;
        double mx = -INFINITY;
        for (std::size_t j = 0; j < tk; ++j) {
          p[j] = sc * kt.dot(qi, K.raw() + (kg * tk + j) * D + h * dh, dh);
          mx = std::max(mx, p[j]);
        }
        double z = 0.0;
        for (std::size_t j = 0; j < tk; ++j) z += (p[j] = std::exp(p[j] - mx));
        for (std::size_t j = 0; j < tk; ++j) p[j] /= z;
        double* oi = out.raw() + (g * tq + i) * D + h * dh;
        for (std::size_t j = 0; j < tk; ++j) kt.axpy(p[j], V.raw() + (kg * tk + j) * D + h * dh, oi, dh);
      }
    }
  }

  return tape.record(
      std::move(out), {q, k, v},
      [=, probs = std::move(probs)](const BackwardArgs& args) {
        const auto& kt = kernels::active();
        const Tensor& Q = *args.inputs[0];
        const Tensor& K = *args.inputs[1];
        const Tensor& V = *args.inputs[2];
        Tensor* gq = args.input_grads[0];
        Tensor* gk = args.input_grads[1];
        Tensor* gv = args.input_grads[2];
        std::vector<double> dp(tk);
        for (std::size_t g = 0; g < q_groups; ++g) {
          const std::size_t kg = kv_groups == 1 ? 0 : g;
          for (std::size_t h = 0; h < heads; ++h) {
            for (std::size_t i = 0; i < tq; ++i) {
              const std::size_t row = (g * tq + i) * D + h * dh;
              const double* p = probs.data() + ((g * heads + h) * tq + i) * tk;
              const double* dout = args.grad.raw() + row;
              double inner = 0.0;
              for (std::size_t j = 0; j < tk; ++j) {
                const std::size_t krow = (kg * tk + j) * D + h * dh;
                dp[j] = kt.dot(dout, V.raw() + krow, dh);
                inner += p[j] * dp[j];
                if (gv) kt.axpy(p[j], dout, gv->raw() + krow, dh);
              }
              for (std::size_t j = 0; j < tk; ++j) {
                const double ds = sc * p[j] * (dp[j] - inner);
                const std::size_t krow = (kg * tk + j) * D + h * dh;
                if (gq) kt.axpy(ds, K.raw() + krow, gq->raw() + row, dh);
                if (gk) kt.axpy(ds, Q.raw() + row, gk->raw() + krow, dh);
              }
            }
          }
        }
      });
}

}  // namespace ad
}  // namespace sanm
