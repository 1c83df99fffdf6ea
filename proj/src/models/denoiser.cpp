#include "sanm/models/denoiser.hpp"

#include <cmath>
#include <stdexcept>

namespace sanm::models {

DenoiserModel DenoiserModel::random(const ModelConfig& cfg, SeededRng& rng) {
  const std::size_t d = cfg.model_dim;
  const std::size_t hidden = d * cfg.ff_mult;
  DenoiserModel m;
  m.config = cfg;
  m.patch_w = init_weight(rng, cfg.latent_c, d);
  m.patch_b = Tensor({d});
  m.pos_emb = gaussian_sample(rng, {cfg.tokens(), d}, 0.1);
  m.pose_w = init_weight(rng, kPoseFeatures, d);
  m.pose_b = Tensor({d});
  m.sigma_w = init_weight(rng, cfg.sigma_features, d);
  m.sigma_b = Tensor({d});
  m.img_w = init_weight(rng, cfg.latent_c, d);
  m.img_b = Tensor({d});
  m.face_w = init_weight(rng, cfg.id_dim, cfg.face_tokens * d);
  m.face_b = Tensor({cfg.face_tokens * d});
  m.face_encoder = FaceEncoder::random(cfg.face_blocks, d, cfg.heads, hidden, rng);
  for (std::size_t i = 0; i < cfg.adapter_blocks; ++i) {
    m.blocks.push_back(IdAdapterBlock::random(d, cfg.heads, hidden, rng));
  }
  m.temporal = AttentionBlock::random(d, cfg.heads, rng);
  m.out_w = init_weight(rng, d, cfg.latent_c, 0.5);
  m.out_b = Tensor({cfg.latent_c});
  return m;
}

Tensor pose_features(const ModelConfig& cfg, const Tensor& pose) {
  if (pose.rank() != 2 || pose.dim(1) != 2) throw ShapeError("pose: expected [frames, 2], got " + shape_str(pose.shape()));
  const std::size_t frames = pose.dim(0);
  const double w = static_cast<double>(cfg.pixel_w());
  const double h = static_cast<double>(cfg.pixel_h());
  const double half = (static_cast<double>(cfg.pixel_patch) - 1.0) / 2.0;
  Tensor out({frames * cfg.tokens(), kPoseFeatures});
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t i = 0; i < cfg.latent_h; ++i) {
      for (std::size_t j = 0; j < cfg.latent_w; ++j) {
        const double cx = static_cast<double>(j * cfg.pixel_patch) + half;
        const double cy = static_cast<double>(i * cfg.pixel_patch) + half;
        const double dx = (pose[f * 2] - cx) / w;
        const double dy = (pose[f * 2 + 1] - cy) / h;
        double* row = out.raw() + ((f * cfg.latent_h + i) * cfg.latent_w + j) * kPoseFeatures;
        row[0] = dx;
        row[1] = dy;
        row[2] = std::exp(-25.0 * (dx * dx + dy * dy));
      }
    }
  }
  return out;
}

Tensor sigma_features(const ModelConfig& cfg, double sigma) {
  const double c_noise = std::log(std::max(sigma, 1e-8)) / 4.0;
  const std::size_t half = cfg.sigma_features / 2;
  Tensor out({1, cfg.sigma_features});
  for (std::size_t k = 0; k < half; ++k) {
    const double freq = std::pow(2.0, static_cast<double>(k));
    out[k] = std::cos(freq * c_noise);
    out[half + k] = std::sin(freq * c_noise);
  }
  return out;
}

Var denoiser_forward(ParamBinder& bind, const DenoiserModel& model, Var x, double sigma, const DenoiserCond& cond) {
  const ModelConfig& cfg = model.config;
  const Tensor& xv = x.value();
  if (xv.rank() != 4 || xv.dim(1) != cfg.latent_h || xv.dim(2) != cfg.latent_w || xv.dim(3) != cfg.latent_c) {
    throw ShapeError("denoiser: latent shape " + shape_str(xv.shape()) + " does not match config");
  }
  if (!(sigma >= 0.0)) throw std::invalid_argument("denoiser: sigma must be >= 0");
  const std::size_t frames = xv.dim(0);
  const std::size_t tokens = cfg.tokens();
  const std::size_t d = cfg.model_dim;
  if (cond.pose.rank() != 2 || cond.pose.dim(0) != frames) throw ShapeError("denoiser: pose rows must match frames");
  if (cond.ref_latent.shape() != Shape{tokens, cfg.latent_c}) throw ShapeError("denoiser: bad reference latent shape");
  if (cond.id_embedding.numel() != cfg.id_dim) throw ShapeError("denoiser: bad identity embedding size");

  Tape& tape = bind.tape();
  const double c_in = 1.0 / std::sqrt(sigma * sigma + cfg.sigma_data * cfg.sigma_data);
  Var h = linear(bind, ad::reshape(x, {frames * tokens, cfg.latent_c}) * c_in, model.patch_w, model.patch_b);

  std::vector<std::size_t> pos_idx;
  pos_idx.reserve(frames * tokens * d);
  for (std::size_t f = 0; f < frames; ++f)
    for (std::size_t t = 0; t < tokens * d; ++t) pos_idx.push_back(t);
  h = h + ad::gather(bind(model.pos_emb), std::move(pos_idx), {frames * tokens, d});
  h = h + linear(bind, tape.constant(pose_features(cfg, cond.pose)), model.pose_w, model.pose_b);
  Var sig = linear(bind, tape.constant(sigma_features(cfg, sigma)), model.sigma_w, model.sigma_b);
  h = ad::add_row(h, ad::reshape(sig, {d}));

  Var emb_img = linear(bind, tape.constant(cond.ref_latent), model.img_w, model.img_b);
  Var face0 = linear(bind, tape.constant(cond.id_embedding.reshaped({1, cfg.id_dim})), model.face_w, model.face_b);
  Var emb_face = face_encoder_forward(bind, model.face_encoder, ad::reshape(face0, {cfg.face_tokens, d}), emb_img);

  for (const auto& block : model.blocks) {
    h = id_adapter_forward(bind, block, h, emb_img, emb_face, frames, cfg.align);
  }

  if (cfg.temporal) {
    // Token-major view so each token position attends across frames.
    std::vector<std::size_t> to_tm, to_fm;
    to_tm.reserve(frames * tokens * d);
    to_fm.resize(frames * tokens * d);
    for (std::size_t t = 0; t < tokens; ++t)
      for (std::size_t f = 0; f < frames; ++f)
        for (std::size_t c = 0; c < d; ++c) {
          to_fm[(f * tokens + t) * d + c] = to_tm.size();
          to_tm.push_back((f * tokens + t) * d + c);
        }
    Var tm = ad::gather(h, std::move(to_tm), {tokens * frames, d});
    tm = self_attention(bind, model.temporal, tm, tokens);
    h = ad::gather(tm, std::move(to_fm), {frames * tokens, d});
  }

  Var out = linear(bind, h, model.out_w, model.out_b);
  return ad::reshape(out, xv.shape());
}

Tensor denoiser_forward(const DenoiserModel& model, const Tensor& x, double sigma, const DenoiserCond& cond) {
  Tape tape;
  ParamBinder bind(tape);
  return denoiser_forward(bind, model, tape.constant(x), sigma, cond).value();
}

}  // namespace sanm::models
