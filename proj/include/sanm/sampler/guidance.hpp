#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "sanm/models/autoencoder.hpp"
#include "sanm/models/identity_embedder.hpp"
#include "sanm/numerics/adam.hpp"

namespace sanm::sampler {

// Sampling-time identity optimization of the denoiser's prediction.
struct GuidanceConfig {
  bool enabled = false;
  double lr = 0.01;
  std::size_t k_steps = 10;
  // Noise levels (t_hat) where the optimization runs; nullopt means every step.
  std::optional<std::pair<double, double>> active_sigma_range;
  // Identity embedding of the reference frame, computed once before sampling.
  Tensor reference_embedding;
  // Keep one Adam state across denoising steps instead of a fresh one per step.
  bool persistent_adam = false;
  // Also optimize the prediction used by the second-order correction.
  bool reoptimize_correction = false;

  // Throws std::invalid_argument when enabled with lr <= 0.
  void validate() const;
  bool active_at(double sigma) const;
};

// mean over frames of |1 - cos(embed(decode(x)), reference)|; lies in [0, 2].
Var face_loss(models::ParamBinder& bind, Var x_op, const Tensor& reference, const models::LatentDecoder& decoder,
              const models::FaceEmbedder& embedder);
double face_loss(const Tensor& x_op, const Tensor& reference, const models::LatentDecoder& decoder,
                 const models::FaceEmbedder& embedder);

struct FaceOptimizeResult {
  Tensor x;
  double loss_before = 0.0;
  double loss_after = 0.0;
  // Loss at the start of every inner iteration, then at the returned x.
  std::vector<double> loss_trace;
};

// k_steps Adam updates on a detached copy of x_pred minimizing face_loss.
// Decoder and embedder stay frozen. Uses a fresh Adam state unless
// `persistent` is given. Returns x_pred unchanged when disabled or k_steps == 0.
// Throws ShapeError when the reference and embedder dimensions differ.
FaceOptimizeResult hjb_face_optimize(const Tensor& x_pred, const GuidanceConfig& guidance,
                                     const models::LatentDecoder& decoder, const models::FaceEmbedder& embedder,
                                     AdamState* persistent = nullptr);

}  // namespace sanm::sampler
