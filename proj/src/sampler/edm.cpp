#include "sanm/sampler/edm.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace sanm::sampler {

Tensor ModelDenoiser::denoise(const Tensor& x, double sigma) const {
  return models::denoiser_forward(*model_, x, sigma, cond_);
}

Tensor GaussianDenoiser::denoise(const Tensor& x, double sigma) const {
  const double s2 = std_ * std_;
  const double n2 = sigma * sigma;
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) out[i] = (s2 * x[i] + n2 * mean_) / (s2 + n2);
  return out;
}

void TrajectoryRecord::write_table(std::ostream& os) const {
  os << "# step t_i gamma loss_before loss_after\n";
  os << std::setprecision(17);
  for (const auto& s : steps) {
    os << s.step << ' ' << s.t << ' ' << s.gamma << ' ' << s.loss_before << ' ' << s.loss_after << '\n';
  }
}

namespace {

bool can_score(const FaceGuidance* g) {
  return g != nullptr && g->decoder != nullptr && g->embedder != nullptr &&
         g->config.reference_embedding.numel() == g->embedder->embedding_dim();
}

Tensor predict(const Denoiser& denoiser, const Tensor& x, double sigma, const FaceGuidance* guidance,
               AdamState* persistent, bool optimize, double* before, double* after) {
  Tensor pred = denoiser.denoise(x, sigma);
  if (optimize && guidance != nullptr && guidance->config.active_at(sigma)) {
    auto res = hjb_face_optimize(pred, guidance->config, *guidance->decoder, *guidance->embedder, persistent);
    if (before) *before = res.loss_before;
    if (after) *after = res.loss_after;
    return std::move(res.x);
  }
  if (before || after) {
    const double loss = can_score(guidance) ? face_loss(pred, guidance->config.reference_embedding,
                                                        *guidance->decoder, *guidance->embedder)
                                            : std::numeric_limits<double>::quiet_NaN();
    if (before) *before = loss;
    if (after) *after = loss;
  }
  return pred;
}

}  // namespace

StepResult edm_step(const Denoiser& denoiser, const EdmSchedule& sched, std::size_t i, const Tensor& x,
                    const FaceGuidance* guidance, SeededRng& rng, AdamState* persistent) {
  if (i >= sched.steps()) throw std::out_of_range("edm_step: step index out of range");
  if (guidance != nullptr) {
    guidance->config.validate();
    if (guidance->config.enabled && !can_score(guidance)) {
      throw std::invalid_argument("edm_step: guidance needs a decoder, an embedder and a matching reference");
    }
  }

  StepRecord rec;
  rec.step = i;
  rec.t = sched.sigma(i);
  rec.gamma = churn_gamma(sched, i);
  rec.t_hat = rec.t + rec.gamma * rec.t;

  const Tensor eps = gaussian_sample(rng, x.shape(), sched.churn().s_noise);
  Tensor x_hat = x + std::sqrt(rec.t_hat * rec.t_hat - rec.t * rec.t) * eps;

  const Tensor x_pred = predict(denoiser, x_hat, rec.t_hat, guidance, persistent, true, &rec.loss_before,
                                &rec.loss_after);
  const Tensor d = (x_hat - x_pred) * (1.0 / rec.t_hat);

  const double t_next = sched.sigma(i + 1);
  // Stepping to t = 0 lands on the prediction; skip the round-off of x_hat - t_hat * d.
  Tensor x_next = t_next == 0.0 ? x_pred : x_hat + (t_next - rec.t_hat) * d;
  if (t_next != 0.0) {
    const bool reopt = guidance != nullptr && guidance->config.reoptimize_correction;
    const Tensor pred2 = predict(denoiser, x_next, t_next, guidance, persistent, reopt, nullptr, nullptr);
    const Tensor d2 = (x_next - pred2) * (1.0 / t_next);
    x_next = x_hat + (t_next - rec.t_hat) * (0.5 * d + 0.5 * d2);
  }
  return {std::move(x_next), rec};
}

SampleResult edm_sample(const Denoiser& denoiser, const EdmSchedule& sched, const Shape& shape,
                        const FaceGuidance* guidance, std::uint64_t seed) {
  SeededRng rng(seed);
  SampleResult out;
  out.x = gaussian_sample(rng, shape, sched.sigma(0));
  std::optional<AdamState> persistent;
  if (guidance != nullptr && guidance->config.persistent_adam) persistent.emplace(AdamConfig{guidance->config.lr});
  out.record.steps.reserve(sched.steps());
  for (std::size_t i = 0; i < sched.steps(); ++i) {
    auto step = edm_step(denoiser, sched, i, out.x, guidance, rng, persistent ? &*persistent : nullptr);
    out.x = std::move(step.x_next);
    out.record.steps.push_back(step.record);
  }
  return out;
}

}  // namespace sanm::sampler
