#pragma once

// Linear stand-ins for the decoder and identity embedder. Their composite is
// a single matrix M, so the face loss has a closed-form minimizer.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sanm/models/autoencoder.hpp"
#include "sanm/models/identity_embedder.hpp"
#include "sanm/sampler/edm.hpp"

namespace sanm::testing {

// latent [F, h, w, c] -> pixels [F, H, W, 3] through one [h*w*c, H*W*3] matrix.
class LinearDecoder final : public models::LatentDecoder {
 public:
  LinearDecoder(Tensor a, std::size_t height, std::size_t width) : a_(std::move(a)), h_(height), w_(width) {}
  Var decode(models::ParamBinder& bind, Var latent) const override {
    const std::size_t frames = latent.shape()[0];
    Var flat = ad::reshape(latent, {frames, a_.dim(0)});
    return ad::reshape(ad::matmul(flat, bind(a_)), {frames, h_, w_, 3});
  }
  const Tensor& matrix() const { return a_; }

 private:
  Tensor a_;
  std::size_t h_, w_;
};

// pixels [F, H, W, 3] -> [F, d] through one matrix, no normalization.
class LinearEmbedder final : public models::FaceEmbedder {
 public:
  explicit LinearEmbedder(Tensor b) : b_(std::move(b)) {}
  Var embed(models::ParamBinder& bind, Var pixels) const override {
    const std::size_t frames = pixels.shape()[0];
    return ad::matmul(ad::reshape(pixels, {frames, b_.dim(0)}), bind(b_));
  }
  std::size_t embedding_dim() const override { return b_.dim(1); }
  const Tensor& matrix() const { return b_; }

 private:
  Tensor b_;
};

struct LinearToy {
  LinearDecoder decoder;
  LinearEmbedder embedder;
  Tensor reference;  // unit [d]
  Tensor x_pred;     // [1, 2, 2, 2]
};

// Latent 1x2x2x2 (n = 8), pixels 1x2x2x3 (12), embedding d = 4.
inline LinearToy make_linear_toy(std::uint64_t seed) {
  SeededRng rng(seed);
  Tensor a = gaussian_sample(rng, {8, 12}, 1.0 / std::sqrt(8.0));
  Tensor b = gaussian_sample(rng, {12, 4}, 1.0 / std::sqrt(12.0));
  Tensor ref = gaussian_sample(rng, {4}, 1.0);
  ref *= 1.0 / l2_norm(ref);
  Tensor x = gaussian_sample(rng, {1, 2, 2, 2}, 1.0);
  return {LinearDecoder(std::move(a), 2, 2), LinearEmbedder(std::move(b)), std::move(ref), std::move(x)};
}

// Minimum-norm x with x M = r for the composite M = A B ([8, 4], full column
// rank): x* = r (M^T M)^{-1} M^T. Its face loss is 0.
inline Tensor least_squares_optimum(const LinearToy& toy) {
  const Tensor m = matmul(toy.decoder.matrix(), toy.embedder.matrix());
  const std::size_t n = m.dim(0), d = m.dim(1);
  const Tensor g = matmul(transpose(m), m);
  // Solve y (M^T M) = r, i.e. (M^T M) y^T = r^T; Gauss-Jordan with partial pivoting.
  std::vector<std::vector<double>> aug(d, std::vector<double>(d + 1));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) aug[i][j] = g[i * d + j];
    aug[i][d] = toy.reference[i];
  }
  for (std::size_t c = 0; c < d; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < d; ++r)
      if (std::abs(aug[r][c]) > std::abs(aug[piv][c])) piv = r;
    std::swap(aug[c], aug[piv]);
    if (std::abs(aug[c][c]) < 1e-14) throw std::runtime_error("least_squares_optimum: singular");
    for (std::size_t r = 0; r < d; ++r) {
      if (r == c) continue;
      const double f = aug[r][c] / aug[c][c];
      for (std::size_t k = c; k <= d; ++k) aug[r][k] -= f * aug[c][k];
    }
  }
  Tensor x({1, 2, 2, 2});
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += aug[j][d] / aug[j][j] * m[i * d + j];
    x[i] = s;
  }
  return x;
}

inline sampler::GuidanceConfig linear_guidance(const LinearToy& toy, double lr = 0.01, std::size_t k = 10) {
  sampler::GuidanceConfig g;
  g.enabled = true;
  g.lr = lr;
  g.k_steps = k;
  g.reference_embedding = toy.reference;
  return g;
}

}  // namespace sanm::testing
