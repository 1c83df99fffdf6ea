#include "sanm/training/pretrain.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "sanm/numerics/adam.hpp"

namespace sanm::training {

namespace {

struct FrameRef {
  const data::SyntheticClip* clip;
  std::size_t frame;
};

std::vector<FrameRef> all_frames(const ClipSet& clips) {
  std::vector<FrameRef> out;
  for (const auto* c : clips)
    for (std::size_t f = 0; f < c->frame_count(); ++f) out.push_back({c, f});
  return out;
}

Tensor gather_frames(const std::vector<FrameRef>& refs) {
  if (refs.empty()) throw std::invalid_argument("pretrain: no frames");
  const Shape& s = refs.front().clip->frames.shape();
  const std::size_t n = s[1] * s[2] * s[3];
  std::vector<double> data;
  data.reserve(refs.size() * n);
  for (const auto& r : refs) {
    if (r.clip->frames.shape() != s) throw ShapeError("pretrain: clips disagree on frame shape");
    const auto& src = r.clip->frames.storage();
    data.insert(data.end(), src.begin() + static_cast<long>(r.frame * n),
                src.begin() + static_cast<long>((r.frame + 1) * n));
  }
  return Tensor({refs.size(), s[1], s[2], s[3]}, std::move(data));
}

std::vector<FrameRef> draw_batch(const std::vector<FrameRef>& frames, std::size_t batch, SeededRng& rng) {
  std::vector<FrameRef> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) out.push_back(frames[rng.below(frames.size())]);
  return out;
}

template <class Model>
void adam_update(Model& model, std::vector<AdamState>& states, const models::ParamBinder& bind, const GradMap& grads) {
  std::size_t k = 0;
  Model::visit(model, [&](const std::string&, Tensor& w) {
    auto v = bind.find(w);
    if (v && grads.contains(*v)) adam_step(states[k], w, grads.at(*v));
    ++k;
  });
}

template <class Model>
std::vector<AdamState> make_states(const Model& model, double lr) {
  std::size_t n = 0;
  Model::visit(model, [&](const std::string&, const Tensor&) { ++n; });
  return std::vector<AdamState>(n, AdamState(AdamConfig{lr}));
}

}  // namespace

Var embedder_pair_loss(Var e, const std::vector<std::uint32_t>& labels, double margin) {
  const std::size_t b = labels.size();
  if (e.value().rank() != 2 || e.value().dim(0) != b) throw ShapeError("embedder_pair_loss: labels do not match rows");
  Tensor same({b, b}), diff({b, b});
  double n_same = 0.0, n_diff = 0.0;
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j) {
      if (i == j) continue;
      if (labels[i] == labels[j]) {
        same[i * b + j] = 1.0;
        n_same += 1.0;
      } else {
        diff[i * b + j] = 1.0;
        n_diff += 1.0;
      }
    }
  Tape& tape = e.tape();
  Var cos = ad::matmul(e, ad::transpose(e));
  Var loss = tape.constant(Tensor::scalar(0.0));
  if (n_same > 0) {
    Var t = ad::sum(ad::square(ad::add_scalar(-cos, 1.0)) * tape.constant(same));
    loss = loss + ad::scale(t, 1.0 / n_same);
  }
  if (n_diff > 0) {
    Var t = ad::sum(ad::square(ad::relu(ad::add_scalar(cos, -margin))) * tape.constant(diff));
    loss = loss + ad::scale(t, 1.0 / n_diff);
  }
  return loss;
}

models::IdentityEmbedder pretrain_identity_embedder(const ClipSet& clips, const models::ModelConfig& model,
                                                    const EmbedderPretrainConfig& config, SeededRng& rng) {
  std::set<std::uint32_t> ids;
  for (const auto* c : clips) ids.insert(c->identity_id);
  if (ids.size() < 2) throw std::invalid_argument("pretrain_identity_embedder: need at least 2 identities");

  auto embedder = models::IdentityEmbedder::random(model, rng);
  auto states = make_states(embedder, config.lr);
  const auto frames = all_frames(clips);
  for (std::size_t step = 0; step < config.steps; ++step) {
    const auto batch = draw_batch(frames, config.batch, rng);
    std::vector<std::uint32_t> labels;
    for (const auto& r : batch) labels.push_back(r.clip->identity_id);
    Tape tape;
    models::ParamBinder bind(tape, true);
    Var e = embedder.embed(bind, tape.constant(gather_frames(batch)));
    Var loss = embedder_pair_loss(e, labels, config.margin);
    adam_update(embedder, states, bind, tape.backprop(loss));
  }
  return embedder;
}

Separation embedder_separation(const models::FaceEmbedder& embedder, const ClipSet& clips) {
  struct Row {
    std::size_t clip;
    std::uint32_t id;
  };
  std::vector<Row> rows;
  std::vector<Tensor> embs;
  for (std::size_t c = 0; c < clips.size(); ++c) {
    Tensor e = models::embed_frames(embedder, clips[c]->frames);
    for (std::size_t f = 0; f < e.dim(0); ++f) rows.push_back({c, clips[c]->identity_id});
    embs.push_back(std::move(e));
  }
  const std::size_t d = embedder.embedding_dim();
  std::vector<double> flat;
  for (const auto& e : embs) flat.insert(flat.end(), e.storage().begin(), e.storage().end());

  Separation s;
  double same = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      if (rows[i].clip == rows[j].clip) continue;
      double cos = 0.0;
      for (std::size_t k = 0; k < d; ++k) cos += flat[i * d + k] * flat[j * d + k];
      if (rows[i].id == rows[j].id) {
        same += cos;
        ++s.same_pairs;
      } else {
        diff += cos;
        ++s.diff_pairs;
      }
    }
  s.same_mean = s.same_pairs ? same / static_cast<double>(s.same_pairs) : 0.0;
  s.diff_mean = s.diff_pairs ? diff / static_cast<double>(s.diff_pairs) : 0.0;
  return s;
}

models::Autoencoder pretrain_decoder(const ClipSet& clips, const models::ModelConfig& model,
                                     const DecoderPretrainConfig& config, SeededRng& rng) {
  models::Autoencoder ae{models::LatentEncoder::random(model, rng), models::ToyDecoder::random(model, rng)};
  if (config.steps == 0) return ae;
  auto enc_states = make_states(ae.encoder, config.lr);
  auto dec_states = make_states(ae.decoder, config.lr);
  const auto frames = all_frames(clips);
  for (std::size_t step = 0; step < config.steps; ++step) {
    Tape tape;
    models::ParamBinder bind(tape, true);
    Var x = tape.constant(gather_frames(draw_batch(frames, config.batch, rng)));
    Var recon = ae.decoder.decode(bind, ae.encoder.encode(bind, x));
    Var loss = ad::mean(ad::square(recon - x));
    const GradMap grads = tape.backprop(loss);
    adam_update(ae.encoder, enc_states, bind, grads);
    adam_update(ae.decoder, dec_states, bind, grads);
  }
  return ae;
}

double reconstruction_psnr(const models::Autoencoder& ae, const ClipSet& clips) {
  const Tensor x = stack_frames(clips);
  const Tensor r = ae.decoder.decode(ae.encoder.encode(x));
  double se = 0.0;
  for (std::size_t i = 0; i < x.numel(); ++i) se += (x[i] - r[i]) * (x[i] - r[i]);
  const double mse = se / static_cast<double>(x.numel());
  return mse < 1e-10 ? 100.0 : 10.0 * std::log10(1.0 / mse);
}

Tensor stack_frames(const ClipSet& clips) { return gather_frames(all_frames(clips)); }

}  // namespace sanm::training
