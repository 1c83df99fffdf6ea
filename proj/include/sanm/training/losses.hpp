#pragma once

#include "sanm/numerics/autodiff.hpp"

namespace sanm::training {

// x0 + t * eps. Throws ShapeError on shape mismatch, std::invalid_argument for t < 0.
Tensor forward_diffuse(const Tensor& x0, double t, const Tensor& eps);

// mean(((z_gt - z_eps) * (1 + M))^2). `mask` either matches z's shape or
// drops its last (channel) axis, in which case it is broadcast over channels.
Var masked_reconstruction_loss(Var z_gt, Var z_eps, const Tensor& mask);
double masked_reconstruction_loss(const Tensor& z_gt, const Tensor& z_eps, const Tensor& mask);

// Pixel mask [F, H, W] -> latent mask [F, H/patch, W/patch]: nearest sample
// at the patch centre, thresholded at 0.5.
Tensor latent_face_mask(const Tensor& pixel_mask, std::size_t patch);

}  // namespace sanm::training
