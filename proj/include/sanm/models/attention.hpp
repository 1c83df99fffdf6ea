#pragma once

#include <string>

#include "sanm/models/params.hpp"

namespace sanm::models {

// Multi-head attention with query/key/value/output projections, each
// [dim, dim]. Every forward adds the input residual.
struct AttentionBlock {
  std::size_t heads = 1;
  std::size_t dim = 0;
  Tensor wq, wk, wv, wo;

  static AttentionBlock random(std::size_t dim, std::size_t heads, SeededRng& rng, double out_gain = 0.5);
  static AttentionBlock zeros(std::size_t dim, std::size_t heads);

  template <class Self, class F>
  static void visit(Self& self, const std::string& prefix, F&& f) {
    f(prefix + ".wq", self.wq);
    f(prefix + ".wk", self.wk);
    f(prefix + ".wv", self.wv);
    f(prefix + ".wo", self.wo);
  }
};

// z + Wo * MHA(z Wq, z Wk, z Wv). z is [groups*tokens, dim]; attention stays
// within each group of rows.
Var self_attention(ParamBinder& bind, const AttentionBlock& block, Var z, std::size_t groups = 1);

// z + Wo * MHA(z Wq, emb Wk, emb Wv). With kv_groups == 1 every query group
// attends to the same emb rows.
Var cross_attention(ParamBinder& bind, const AttentionBlock& block, Var z, Var emb, std::size_t q_groups = 1,
                    std::size_t kv_groups = 1);

Tensor self_attention(const AttentionBlock& block, const Tensor& z);
Tensor cross_attention(const AttentionBlock& block, const Tensor& z, const Tensor& emb);

// z + W2 silu(z W1 + b1) + b2
struct FeedForward {
  Tensor w1, b1, w2, b2;

  static FeedForward random(std::size_t dim, std::size_t hidden, SeededRng& rng, double out_gain = 0.5);
  static FeedForward zeros(std::size_t dim, std::size_t hidden);

  template <class Self, class F>
  static void visit(Self& self, const std::string& prefix, F&& f) {
    f(prefix + ".w1", self.w1);
    f(prefix + ".b1", self.b1);
    f(prefix + ".w2", self.w2);
    f(prefix + ".b2", self.b2);
  }
};

Var feedforward(ParamBinder& bind, const FeedForward& ff, Var z);

}  // namespace sanm::models
