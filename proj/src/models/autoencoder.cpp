#include "sanm/models/autoencoder.hpp"

namespace sanm::models {

ToyDecoder ToyDecoder::random(const ModelConfig& cfg, SeededRng& rng) {
  ToyDecoder d(cfg);
  d.w1 = init_weight(rng, cfg.latent_c, cfg.decoder_hidden);
  d.b1 = Tensor({cfg.decoder_hidden});
  d.w2 = init_weight(rng, cfg.decoder_hidden, cfg.patch_values());
  d.b2 = Tensor({cfg.patch_values()});
  return d;
}

Var ToyDecoder::decode(ParamBinder& bind, Var latent) const {
  const Tensor& z = latent.value();
  if (z.rank() != 4 || z.dim(1) != config_.latent_h || z.dim(2) != config_.latent_w || z.dim(3) != config_.latent_c) {
    throw ShapeError("decoder: latent shape " + shape_str(z.shape()) + " does not match config");
  }
  const std::size_t frames = z.dim(0);
  Var cells = ad::reshape(latent, {frames * config_.tokens(), config_.latent_c});
  Var h = ad::silu(linear(bind, cells, w1, b1));
  Var patches = ad::sigmoid(linear(bind, h, w2, b2));
  return ad::gather(patches,
                    unpatchify_indices(frames, config_.pixel_h(), config_.pixel_w(), config_.pixel_c,
                                       config_.pixel_patch),
                    {frames, config_.pixel_h(), config_.pixel_w(), config_.pixel_c});
}

Tensor ToyDecoder::decode(const Tensor& latent) const {
  Tape tape;
  ParamBinder bind(tape);
  return decode(bind, tape.constant(latent)).value();
}

LatentEncoder LatentEncoder::random(const ModelConfig& cfg, SeededRng& rng) {
  LatentEncoder e(cfg);
  e.w1 = init_weight(rng, cfg.patch_values(), cfg.decoder_hidden);
  e.b1 = Tensor({cfg.decoder_hidden});
  e.w2 = init_weight(rng, cfg.decoder_hidden, cfg.latent_c);
  e.b2 = Tensor({cfg.latent_c});
  return e;
}

Var LatentEncoder::encode(ParamBinder& bind, Var pixels) const {
  const Tensor& p = pixels.value();
  if (p.rank() != 4 || p.dim(1) != config_.pixel_h() || p.dim(2) != config_.pixel_w() || p.dim(3) != config_.pixel_c) {
    throw ShapeError("encoder: pixel shape " + shape_str(p.shape()) + " does not match config");
  }
  const std::size_t frames = p.dim(0);
  Var patches = ad::gather(pixels,
                           patchify_indices(frames, config_.pixel_h(), config_.pixel_w(), config_.pixel_c,
                                            config_.pixel_patch),
                           {frames * config_.tokens(), config_.patch_values()});
  Var h = ad::silu(linear(bind, patches, w1, b1));
  Var z = ad::tanh(linear(bind, h, w2, b2));
  return ad::reshape(z, {frames, config_.latent_h, config_.latent_w, config_.latent_c});
}

Tensor LatentEncoder::encode(const Tensor& pixels) const {
  Tape tape;
  ParamBinder bind(tape);
  return encode(bind, tape.constant(pixels)).value();
}

}  // namespace sanm::models
