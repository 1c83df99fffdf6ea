#include "sanm/models/attention.hpp"

namespace sanm::models {
namespace {

void check_input(const AttentionBlock& block, const Tensor& x, const char* what) {
  if (x.rank() != 2 || x.dim(1) != block.dim) {
    throw ShapeError(std::string(what) + ": expected [*, " + std::to_string(block.dim) + "], got " +
                     shape_str(x.shape()));
  }
}

}  // namespace

AttentionBlock AttentionBlock::random(std::size_t dim, std::size_t heads, SeededRng& rng, double out_gain) {
  if (heads == 0 || dim % heads != 0) throw std::invalid_argument("attention: dim must be divisible by heads");
  return AttentionBlock{heads, dim, init_weight(rng, dim, dim), init_weight(rng, dim, dim),
                        init_weight(rng, dim, dim), init_weight(rng, dim, dim, out_gain)};
}

AttentionBlock AttentionBlock::zeros(std::size_t dim, std::size_t heads) {
  if (heads == 0 || dim % heads != 0) throw std::invalid_argument("attention: dim must be divisible by heads");
  return AttentionBlock{heads, dim, Tensor({dim, dim}), Tensor({dim, dim}), Tensor({dim, dim}), Tensor({dim, dim})};
}

Var self_attention(ParamBinder& bind, const AttentionBlock& block, Var z, std::size_t groups) {
  return cross_attention(bind, block, z, z, groups, groups);
}

Var cross_attention(ParamBinder& bind, const AttentionBlock& block, Var z, Var emb, std::size_t q_groups,
                    std::size_t kv_groups) {
  check_input(block, z.value(), "attention query");
  check_input(block, emb.value(), "attention keys");
  Var q = ad::matmul(z, bind(block.wq));
  Var k = ad::matmul(emb, bind(block.wk));
  Var v = ad::matmul(emb, bind(block.wv));
  Var heads = ad::attention(q, k, v, block.heads, q_groups, kv_groups);
  return z + ad::matmul(heads, bind(block.wo));
}

Tensor self_attention(const AttentionBlock& block, const Tensor& z) {
  Tape tape;
  ParamBinder bind(tape);
  return self_attention(bind, block, tape.constant(z)).value();
}

Tensor cross_attention(const AttentionBlock& block, const Tensor& z, const Tensor& emb) {
  Tape tape;
  ParamBinder bind(tape);
  return cross_attention(bind, block, tape.constant(z), tape.constant(emb)).value();
}

FeedForward FeedForward::random(std::size_t dim, std::size_t hidden, SeededRng& rng, double out_gain) {
  return FeedForward{init_weight(rng, dim, hidden), Tensor({hidden}), init_weight(rng, hidden, dim, out_gain),
                     Tensor({dim})};
}

FeedForward FeedForward::zeros(std::size_t dim, std::size_t hidden) {
  return FeedForward{Tensor({dim, hidden}), Tensor({hidden}), Tensor({hidden, dim}), Tensor({dim})};
}

Var feedforward(ParamBinder& bind, const FeedForward& ff, Var z) {
  Var h = ad::silu(linear(bind, z, ff.w1, ff.b1));
  return z + linear(bind, h, ff.w2, ff.b2);
}

}  // namespace sanm::models
