#pragma once

#include "sanm/models/config.hpp"
#include "sanm/models/params.hpp"

namespace sanm::models {

// Differentiable map from latent frames [F, h, w, c] to pixel frames
// [F, H, W, 3].
class LatentDecoder {
 public:
  virtual ~LatentDecoder() = default;
  virtual Var decode(ParamBinder& bind, Var latent) const = 0;
};

// Per-cell MLP decoder: each latent cell becomes one pixel patch, squashed
// into [0, 1] by a sigmoid.
class ToyDecoder final : public LatentDecoder {
 public:
  ToyDecoder() = default;
  explicit ToyDecoder(const ModelConfig& config) : config_(config) {}

  static ToyDecoder random(const ModelConfig& config, SeededRng& rng);

  Var decode(ParamBinder& bind, Var latent) const override;
  Tensor decode(const Tensor& latent) const;

  const ModelConfig& config() const { return config_; }

  Tensor w1, b1, w2, b2;

  template <class Self, class F>
  static void visit(Self& self, F&& f) {
    f("decoder.w1", self.w1);
    f("decoder.b1", self.b1);
    f("decoder.w2", self.w2);
    f("decoder.b2", self.b2);
  }

 private:
  ModelConfig config_;
};

// Pixel frames -> latent frames; used only to prepare training data and
// reference latents. Output is tanh-bounded to [-1, 1].
class LatentEncoder {
 public:
  LatentEncoder() = default;
  explicit LatentEncoder(const ModelConfig& config) : config_(config) {}

  static LatentEncoder random(const ModelConfig& config, SeededRng& rng);

  Var encode(ParamBinder& bind, Var pixels) const;
  Tensor encode(const Tensor& pixels) const;

  const ModelConfig& config() const { return config_; }

  Tensor w1, b1, w2, b2;

  template <class Self, class F>
  static void visit(Self& self, F&& f) {
    f("encoder.w1", self.w1);
    f("encoder.b1", self.b1);
    f("encoder.w2", self.w2);
    f("encoder.b2", self.b2);
  }

 private:
  ModelConfig config_;
};

struct Autoencoder {
  LatentEncoder encoder;
  ToyDecoder decoder;
};

}  // namespace sanm::models
