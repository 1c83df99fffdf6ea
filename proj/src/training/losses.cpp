#include "sanm/training/losses.hpp"

#include <stdexcept>

namespace sanm::training {

Tensor forward_diffuse(const Tensor& x0, double t, const Tensor& eps) {
  require_same_shape(x0, eps, "forward_diffuse");
  if (!(t >= 0.0)) throw std::invalid_argument("forward_diffuse: t must be >= 0");
  return x0 + t * eps;
}

namespace {

Tensor loss_weights(const Shape& shape, const Tensor& mask) {
  Tensor w(shape);
  if (mask.shape() == shape) {
    for (std::size_t i = 0; i < w.numel(); ++i) w[i] = 1.0 + mask[i];
    return w;
  }
  Shape reduced(shape.begin(), shape.end() - (shape.empty() ? 0 : 1));
  if (shape.empty() || mask.shape() != reduced) {
    throw ShapeError("masked_reconstruction_loss: mask " + shape_str(mask.shape()) + " does not fit latent " +
                     shape_str(shape));
  }
  const std::size_t channels = shape.back();
  for (std::size_t i = 0; i < w.numel(); ++i) w[i] = 1.0 + mask[i / channels];
  return w;
}

}  // namespace

Var masked_reconstruction_loss(Var z_gt, Var z_eps, const Tensor& mask) {
  if (z_gt.shape() != z_eps.shape()) {
    throw ShapeError("masked_reconstruction_loss: shape mismatch " + shape_str(z_gt.shape()) + " vs " +
                     shape_str(z_eps.shape()));
  }
  Var w = z_gt.tape().constant(loss_weights(z_gt.shape(), mask));
  return ad::mean(ad::square((z_gt - z_eps) * w));
}

double masked_reconstruction_loss(const Tensor& z_gt, const Tensor& z_eps, const Tensor& mask) {
  Tape tape;
  return masked_reconstruction_loss(tape.constant(z_gt), tape.constant(z_eps), mask).value().item();
}

Tensor latent_face_mask(const Tensor& pixel_mask, std::size_t patch) {
  if (pixel_mask.rank() != 3 || patch == 0 || pixel_mask.dim(1) % patch != 0 || pixel_mask.dim(2) % patch != 0) {
    throw ShapeError("latent_face_mask: mask " + shape_str(pixel_mask.shape()) + " not divisible by patch");
  }
  const std::size_t frames = pixel_mask.dim(0), h = pixel_mask.dim(1), w = pixel_mask.dim(2);
  const std::size_t lh = h / patch, lw = w / patch;
  Tensor out({frames, lh, lw});
  for (std::size_t f = 0; f < frames; ++f)
    for (std::size_t i = 0; i < lh; ++i)
      for (std::size_t j = 0; j < lw; ++j) {
        const double v = pixel_mask[(f * h + i * patch + patch / 2) * w + j * patch + patch / 2];
        out[(f * lh + i) * lw + j] = v >= 0.5 ? 1.0 : 0.0;
      }
  return out;
}

}  // namespace sanm::training
