#pragma once

#include <vector>

#include "sanm/data/clip.hpp"
#include "sanm/models/autoencoder.hpp"
#include "sanm/models/identity_embedder.hpp"

namespace sanm::training {

using ClipSet = std::vector<const data::SyntheticClip*>;

struct EmbedderPretrainConfig {
  std::size_t steps = 1000;
  std::size_t batch = 32;  // frames per step, drawn with replacement
  double lr = 0.003;
  double margin = 0.3;
};

// Pair objective on unit embeddings e[B, d] with identity labels:
// mean over same pairs of (1 - cos)^2 plus mean over different pairs of
// relu(cos - margin)^2. A term with no pairs contributes 0.
Var embedder_pair_loss(Var embeddings, const std::vector<std::uint32_t>& labels, double margin);

// Trains the identity embedder on the frames of `clips`. Throws
// std::invalid_argument when the clips hold fewer than 2 identities.
models::IdentityEmbedder pretrain_identity_embedder(const ClipSet& clips, const models::ModelConfig& model,
                                                    const EmbedderPretrainConfig& config, SeededRng& rng);

struct Separation {
  double same_mean = 0.0;  // mean cosine over frame pairs from different clips of one identity
  double diff_mean = 0.0;  // mean cosine over frame pairs of different identities
  std::size_t same_pairs = 0;
  std::size_t diff_pairs = 0;
};

Separation embedder_separation(const models::FaceEmbedder& embedder, const ClipSet& clips);

struct DecoderPretrainConfig {
  std::size_t steps = 3000;
  std::size_t batch = 32;  // frames per step
  double lr = 0.01;
};

// Trains encoder and decoder jointly on frame reconstruction. steps == 0
// returns the random initialization.
models::Autoencoder pretrain_decoder(const ClipSet& clips, const models::ModelConfig& model,
                                     const DecoderPretrainConfig& config, SeededRng& rng);

// 10 log10(1 / MSE) of decode(encode(frames)) over every frame of `clips`.
double reconstruction_psnr(const models::Autoencoder& ae, const ClipSet& clips);

// Every frame of the clips stacked into [sum F, H, W, 3].
Tensor stack_frames(const ClipSet& clips);

}  // namespace sanm::training
