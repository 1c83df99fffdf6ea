#pragma once

#include "sanm/models/config.hpp"
#include "sanm/models/params.hpp"

namespace sanm::models {

// Differentiable map from pixel frames [F, H, W, 3] to per-frame embeddings
// [F, d].
class FaceEmbedder {
 public:
  virtual ~FaceEmbedder() = default;
  virtual Var embed(ParamBinder& bind, Var pixels) const = 0;
  virtual std::size_t embedding_dim() const = 0;
};

// Toy identity network: a shared MLP over small pixel patches, mean-pooled
// per frame, projected to id_dim and normalized to unit length.
class IdentityEmbedder final : public FaceEmbedder {
 public:
  IdentityEmbedder() = default;
  explicit IdentityEmbedder(const ModelConfig& config) : config_(config) {}

  static IdentityEmbedder random(const ModelConfig& config, SeededRng& rng);

  Var embed(ParamBinder& bind, Var pixels) const override;
  std::size_t embedding_dim() const override { return config_.id_dim; }

  const ModelConfig& config() const { return config_; }

  Tensor w1, b1, w2, b2;

  template <class Self, class F>
  static void visit(Self& self, F&& f) {
    f("embedder.w1", self.w1);
    f("embedder.b1", self.b1);
    f("embedder.w2", self.w2);
    f("embedder.b2", self.b2);
  }

 private:
  ModelConfig config_;
};

// Unit-norm embeddings of every frame: [F, d]. Accepts a single frame
// [H, W, 3] as well, giving [1, d].
Tensor embed_frames(const FaceEmbedder& embedder, const Tensor& pixels);

// Embedding of one frame as a [d] unit vector.
Tensor identity_embed(const FaceEmbedder& embedder, const Tensor& frame);

}  // namespace sanm::models
