#pragma once

#include <vector>

#include "sanm/data/clip.hpp"
#include "sanm/models/autoencoder.hpp"
#include "sanm/models/denoiser.hpp"
#include "sanm/models/identity_embedder.hpp"
#include "sanm/numerics/adam.hpp"

namespace sanm::training {

struct TrainConfig {
  std::size_t epochs = 20;
  double lr = 0.002;
  // Training noise levels are log-uniform on [sigma_min, sigma_max].
  double sigma_min = 0.02;
  double sigma_max = 80.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// A clip translated into the denoiser's latent space, with its conditioning.
struct PreparedClip {
  Tensor latent;       // [F, h, w, c]
  Tensor latent_mask;  // [F, h, w]
  models::DenoiserCond cond;
  std::uint32_t identity_id = 0;
  Tensor frames;               // [F, H, W, 3] ground truth pixels
  Tensor reference_frame;      // [H, W, 3]
  Tensor reference_embedding;  // [id_dim]
};

PreparedClip prepare_clip(const data::SyntheticClip& clip, const models::LatentEncoder& encoder,
                          const models::FaceEmbedder& embedder, const models::ModelConfig& config);

// Trainable state: denoiser (with its FaceEncoder and pose conditioner) and
// one Adam state per weight tensor.
struct TrainState {
  models::DenoiserModel model;
  std::vector<AdamState> optim;
  std::size_t epoch = 0;  // completed epochs

  static TrainState init(const models::ModelConfig& model, const TrainConfig& config);
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  std::size_t clips = 0;
};

// One pass over the clips in an order, noise levels and noise drawn from
// (config.seed, epoch). Throws std::invalid_argument for an empty dataset.
EpochStats train_epoch(TrainState& state, const std::vector<PreparedClip>& clips, const TrainConfig& config);

// Mean masked loss under the draws train_epoch would use for 1-based `epoch`,
// without updating anything.
double evaluation_loss(const models::DenoiserModel& model, const std::vector<PreparedClip>& clips,
                       const TrainConfig& config, std::size_t epoch);

}  // namespace sanm::training
