#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "sanm/models/denoiser.hpp"
#include "sanm/numerics/rng.hpp"
#include "sanm/sampler/guidance.hpp"
#include "sanm/schedule.hpp"

namespace sanm::sampler {

// D(x; sigma): predicts the clean sample.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Tensor denoise(const Tensor& x, double sigma) const = 0;
};

class ModelDenoiser final : public Denoiser {
 public:
  ModelDenoiser(const models::DenoiserModel& model, models::DenoiserCond cond)
      : model_(&model), cond_(std::move(cond)) {}
  Tensor denoise(const Tensor& x, double sigma) const override;

 private:
  const models::DenoiserModel* model_;
  models::DenoiserCond cond_;
};

// Exact posterior mean E[x0 | x0 + sigma n] for elementwise N(mean, std^2) data.
class GaussianDenoiser final : public Denoiser {
 public:
  GaussianDenoiser(double mean, double std) : mean_(mean), std_(std) {}
  Tensor denoise(const Tensor& x, double sigma) const override;

 private:
  double mean_;
  double std_;
};

// Guidance settings plus the frozen networks it differentiates through.
struct FaceGuidance {
  GuidanceConfig config;
  const models::LatentDecoder* decoder = nullptr;
  const models::FaceEmbedder* embedder = nullptr;
};

struct StepRecord {
  std::size_t step = 0;
  double t = 0.0;
  double t_hat = 0.0;
  double gamma = 0.0;
  // face_loss of the prediction before/after optimization; NaN without guidance networks.
  double loss_before = 0.0;
  double loss_after = 0.0;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct TrajectoryRecord {
  std::vector<StepRecord> steps;

  // "# step t_i gamma loss_before loss_after" header, then one row per step.
  void write_table(std::ostream& os) const;
};

struct StepResult {
  Tensor x_next;
  StepRecord record;
};

// One stochastic second-order step from t_i to t_{i+1}. Draws exactly one
// noise tensor from `rng`; the guidance loop consumes no randomness.
StepResult edm_step(const Denoiser& denoiser, const EdmSchedule& sched, std::size_t i, const Tensor& x,
                    const FaceGuidance* guidance, SeededRng& rng, AdamState* persistent = nullptr);

struct SampleResult {
  Tensor x;
  TrajectoryRecord record;
};

// x_0 ~ N(0, t_0^2 I), then edm_step for i = 0..N-1.
SampleResult edm_sample(const Denoiser& denoiser, const EdmSchedule& sched, const Shape& shape,
                        const FaceGuidance* guidance, std::uint64_t seed);

}  // namespace sanm::sampler
