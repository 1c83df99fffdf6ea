#include "sanm/training/trainer.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sanm/training/losses.hpp"

namespace sanm::training {

namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kEpochStreamBase = 100;

double run_epoch(models::DenoiserModel& model, std::vector<AdamState>* optim, const std::vector<PreparedClip>& clips,
                 const TrainConfig& config, std::size_t epoch) {
  if (clips.empty()) throw std::invalid_argument("train_epoch: empty dataset");
  config.validate();
  SeededRng rng = SeededRng(config.seed).derive(kEpochStreamBase + epoch);

  std::vector<std::size_t> order(clips.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  const double lo = std::log(config.sigma_min), hi = std::log(config.sigma_max);
  double total = 0.0;
  for (std::size_t idx : order) {
    const PreparedClip& clip = clips[idx];
    const double sigma = std::exp(rng.uniform(lo, hi));
    const Tensor eps = gaussian_sample(rng, clip.latent.shape(), 1.0);
    const Tensor noisy = forward_diffuse(clip.latent, sigma, eps);

    Tape tape;
    models::ParamBinder bind(tape, optim != nullptr);
    Var pred = models::denoiser_forward(bind, model, tape.constant(noisy), sigma, clip.cond);
    Var loss = masked_reconstruction_loss(tape.constant(clip.latent), pred, clip.latent_mask);
    total += loss.value().item();
    if (optim == nullptr) continue;

    const GradMap grads = tape.backprop(loss);
    std::size_t k = 0;
    models::DenoiserModel::visit(model, [&](const std::string&, Tensor& w) {
      auto v = bind.find(w);
      if (v && grads.contains(*v)) adam_step((*optim)[k], w, grads.at(*v));
      ++k;
    });
  }
  return total / static_cast<double>(clips.size());
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr >= 0.0)) throw std::invalid_argument("train: lr must be >= 0");
  if (!(sigma_min > 0.0 && sigma_min < sigma_max)) throw std::invalid_argument("train: need 0 < sigma_min < sigma_max");
}

PreparedClip prepare_clip(const data::SyntheticClip& clip, const models::LatentEncoder& encoder,
                          const models::FaceEmbedder& embedder, const models::ModelConfig& config) {
  if (clip.frames.rank() != 4 || clip.frames.shape() != config.pixel_shape()) {
    throw ShapeError("prepare_clip: clip frames " + shape_str(clip.frames.shape()) + " do not match model " +
                     shape_str(config.pixel_shape()));
  }
  PreparedClip p;
  p.identity_id = clip.identity_id;
  p.frames = clip.frames;
  p.latent = encoder.encode(clip.frames);
  p.latent_mask = latent_face_mask(clip.mask, config.pixel_patch);
  p.reference_frame = data::reference_frame(clip);
  p.reference_embedding = models::identity_embed(embedder, p.reference_frame);

  const Tensor ref = encoder.encode(p.reference_frame.reshaped({1, config.pixel_h(), config.pixel_w(), config.pixel_c}));
  p.cond.ref_latent = ref.reshaped({config.tokens(), config.latent_c});
  p.cond.id_embedding = p.reference_embedding;
  p.cond.pose = Tensor({clip.frame_count(), 2});
  for (std::size_t i = 0; i < clip.pose_track.size(); ++i) p.cond.pose[i] = clip.pose_track[i];
  return p;
}

TrainState TrainState::init(const models::ModelConfig& model, const TrainConfig& config) {
  SeededRng rng = SeededRng(config.seed).derive(kInitStream);
  TrainState s{models::DenoiserModel::random(model, rng), {}, 0};
  models::DenoiserModel::visit(s.model, [&](const std::string&, const Tensor&) {
    s.optim.emplace_back(AdamConfig{config.lr});
  });
  return s;
}

EpochStats train_epoch(TrainState& state, const std::vector<PreparedClip>& clips, const TrainConfig& config) {
  for (auto& o : state.optim) o.config.lr = config.lr;
  const std::size_t epoch = state.epoch + 1;
  const double loss = run_epoch(state.model, &state.optim, clips, config, epoch);
  state.epoch = epoch;
  return {epoch, loss, clips.size()};
}

double evaluation_loss(const models::DenoiserModel& model, const std::vector<PreparedClip>& clips,
                       const TrainConfig& config, std::size_t epoch) {
  models::DenoiserModel copy = model;
  return run_epoch(copy, nullptr, clips, config, epoch);
}

}  // namespace sanm::training
