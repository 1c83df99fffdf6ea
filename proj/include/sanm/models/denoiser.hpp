#pragma once

#include <vector>

#include "sanm/models/config.hpp"
#include "sanm/models/face_encoder.hpp"
#include "sanm/models/id_adapter.hpp"

namespace sanm::models {

// Conditioning shared by every frame of one clip.
struct DenoiserCond {
  Tensor ref_latent;    // [tokens, latent_c]: latent of the reference frame
  Tensor id_embedding;  // [id_dim]: identity embedding of the reference frame
  Tensor pose;          // [frames, 2]: glyph centre (x, y) in pixels per frame
};

// Spatio-temporal toy denoiser. Predicts the clean latent directly.
struct DenoiserModel {
  ModelConfig config;

  Tensor patch_w, patch_b;  // latent cell -> model_dim
  Tensor pos_emb;           // [tokens, model_dim]
  Tensor pose_w, pose_b;    // per-token pose features -> model_dim
  Tensor sigma_w, sigma_b;  // sinusoidal noise features -> model_dim
  Tensor img_w, img_b;      // reference latent cells -> image embedding tokens
  Tensor face_w, face_b;    // identity vector -> face embedding tokens
  FaceEncoder face_encoder;
  std::vector<IdAdapterBlock> blocks;
  AttentionBlock temporal;
  Tensor out_w, out_b;

  static DenoiserModel random(const ModelConfig& config, SeededRng& rng);

  template <class Self, class F>
  static void visit(Self& self, F&& f) {
    f("patch.w", self.patch_w);
    f("patch.b", self.patch_b);
    f("pos_emb", self.pos_emb);
    f("pose.w", self.pose_w);
    f("pose.b", self.pose_b);
    f("sigma.w", self.sigma_w);
    f("sigma.b", self.sigma_b);
    f("img.w", self.img_w);
    f("img.b", self.img_b);
    f("face.w", self.face_w);
    f("face.b", self.face_b);
    FaceEncoder::visit(self.face_encoder, "face_encoder", f);
    for (std::size_t i = 0; i < self.blocks.size(); ++i) {
      IdAdapterBlock::visit(self.blocks[i], "blocks." + std::to_string(i), f);
    }
    AttentionBlock::visit(self.temporal, "temporal", f);
    f("out.w", self.out_w);
    f("out.b", self.out_b);
  }
};

inline constexpr std::size_t kPoseFeatures = 3;

// Per-token pose features [frames*tokens, 3]: glyph offset from the token
// centre (normalized by frame size) and a Gaussian proximity bump.
Tensor pose_features(const ModelConfig& config, const Tensor& pose);
// [1, sigma_features] sinusoidal features of log(sigma) / 4.
Tensor sigma_features(const ModelConfig& config, double sigma);

// x: [frames, latent_h, latent_w, latent_c] -> same shape. Throws ShapeError
// on shape/config mismatch and std::invalid_argument for sigma < 0.
Var denoiser_forward(ParamBinder& bind, const DenoiserModel& model, Var x, double sigma, const DenoiserCond& cond);
Tensor denoiser_forward(const DenoiserModel& model, const Tensor& x, double sigma, const DenoiserCond& cond);

}  // namespace sanm::models
