#include "sanm/metrics/image_metrics.hpp"

#include <cmath>

namespace sanm::metrics {

double l1_metric(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "l1_metric");
  if (a.empty()) throw ShapeError("l1_metric: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.numel());
}

double psnr_metric(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "psnr_metric");
  if (a.empty()) throw ShapeError("psnr_metric: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  const double mse = s / static_cast<double>(a.numel());
  return mse < 1e-10 ? kPsnrCap : 10.0 * std::log10(1.0 / mse);
}

double ssim_metric(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "ssim_metric");
  if (a.empty()) throw ShapeError("ssim_metric: empty input");
  constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  const double n = static_cast<double>(a.numel());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double va = 0.0, vb = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
    cov += (a[i] - ma) * (b[i] - mb);
  }
  va /= n;
  vb /= n;
  cov /= n;
  return ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
}

double csim_against(const Tensor& frames, const Tensor& reference_embedding, const models::FaceEmbedder& embedder) {
  const Tensor e = models::embed_frames(embedder, frames);
  const std::size_t d = embedder.embedding_dim();
  if (reference_embedding.numel() != d) throw ShapeError("csim: reference embedding dimension mismatch");
  double ref_norm = 0.0;
  for (std::size_t k = 0; k < d; ++k) ref_norm += reference_embedding[k] * reference_embedding[k];
  ref_norm = std::max(std::sqrt(ref_norm), 1e-8);
  double total = 0.0;
  for (std::size_t f = 0; f < e.dim(0); ++f) {
    double dot = 0.0;
    for (std::size_t k = 0; k < d; ++k) dot += e[f * d + k] * reference_embedding[k];
    total += dot / ref_norm;
  }
  return total / static_cast<double>(e.dim(0));
}

double csim_metric(const Tensor& frames, const Tensor& reference, const models::FaceEmbedder& embedder) {
  return csim_against(frames, models::identity_embed(embedder, reference), embedder);
}

}  // namespace sanm::metrics
