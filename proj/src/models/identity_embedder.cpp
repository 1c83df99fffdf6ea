#include "sanm/models/identity_embedder.hpp"

namespace sanm::models {

IdentityEmbedder IdentityEmbedder::random(const ModelConfig& cfg, SeededRng& rng) {
  IdentityEmbedder e(cfg);
  const std::size_t in = cfg.embedder_patch * cfg.embedder_patch * cfg.pixel_c;
  e.w1 = init_weight(rng, in, cfg.embedder_hidden);
  e.b1 = gaussian_sample(rng, {cfg.embedder_hidden}, 0.5);
  e.w2 = init_weight(rng, cfg.embedder_hidden, cfg.id_dim);
  e.b2 = Tensor({cfg.id_dim});
  return e;
}

Var IdentityEmbedder::embed(ParamBinder& bind, Var pixels) const {
  const Tensor& p = pixels.value();
  if (p.rank() != 4 || p.dim(1) != config_.pixel_h() || p.dim(2) != config_.pixel_w() || p.dim(3) != config_.pixel_c) {
    throw ShapeError("embedder: pixel shape " + shape_str(p.shape()) + " does not match config");
  }
  const std::size_t frames = p.dim(0);
  const std::size_t patch = config_.embedder_patch;
  const std::size_t per_frame = (config_.pixel_h() / patch) * (config_.pixel_w() / patch);
  Var patches = ad::gather(pixels, patchify_indices(frames, config_.pixel_h(), config_.pixel_w(), config_.pixel_c, patch),
                           {frames * per_frame, patch * patch * config_.pixel_c});
  Var h = ad::tanh(linear(bind, patches, w1, b1));
  Var pooled = ad::group_mean_rows(h, frames);
  return ad::normalize_rows(linear(bind, pooled, w2, b2), 1e-8);
}

Tensor embed_frames(const FaceEmbedder& embedder, const Tensor& pixels) {
  Tape tape;
  ParamBinder bind(tape);
  Tensor input = pixels.rank() == 3 ? pixels.reshaped({1, pixels.dim(0), pixels.dim(1), pixels.dim(2)}) : pixels;
  return embedder.embed(bind, tape.constant(std::move(input))).value();
}

Tensor identity_embed(const FaceEmbedder& embedder, const Tensor& frame) {
  Tensor e = embed_frames(embedder, frame);
  if (e.dim(0) != 1) throw ShapeError("identity_embed: expected a single frame");
  return e.reshaped({e.dim(1)});
}

}  // namespace sanm::models
