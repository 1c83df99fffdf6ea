#pragma once

#include "sanm/models/identity_embedder.hpp"

namespace sanm::metrics {

inline constexpr double kPsnrCap = 100.0;

// mean |a - b|. Throws ShapeError on shape mismatch.
double l1_metric(const Tensor& a, const Tensor& b);
// 10 log10(1 / MSE) for values in [0, 1]; kPsnrCap when MSE < 1e-10.
double psnr_metric(const Tensor& a, const Tensor& b);
// SSIM from global statistics, L = 1, K1 = 0.01, K2 = 0.03.
double ssim_metric(const Tensor& a, const Tensor& b);
// Mean over frames of cos(embed(frame), embed(reference)). `frames` is
// [F, H, W, 3]; `reference` is [H, W, 3].
double csim_metric(const Tensor& frames, const Tensor& reference, const models::FaceEmbedder& embedder);
// Same, against a precomputed reference embedding.
double csim_against(const Tensor& frames, const Tensor& reference_embedding, const models::FaceEmbedder& embedder);

}  // namespace sanm::metrics
