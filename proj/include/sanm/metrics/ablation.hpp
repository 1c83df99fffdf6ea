#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sanm/sampler/edm.hpp"
#include "sanm/training/trainer.hpp"

namespace sanm::metrics {

struct ClipMetrics {
  std::size_t clip = 0;
  std::uint32_t identity_id = 0;
  double l1 = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
  double csim = 0.0;
};

struct EvalReport {
  std::string variant;
  std::vector<ClipMetrics> clips;
  // Means over clips.
  double l1 = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
  double csim = 0.0;

  std::vector<double> csim_values() const;
};

struct VariantSpec {
  std::string label;
  const models::DenoiserModel* model = nullptr;
  bool guided = true;
};

struct EvalSetup {
  const models::LatentDecoder* decoder = nullptr;
  const models::FaceEmbedder* embedder = nullptr;
  EdmSchedule schedule = build_schedule(18);
  // lr, k_steps, range and flags; the reference embedding is filled per clip.
  sampler::GuidanceConfig guidance;
  std::uint64_t seed = 0;
};

// Samples every clip (seed + clip index, so variants share their noise),
// decodes and scores it against the clip's pixels and reference frame.
EvalReport evaluate_variant(const VariantSpec& variant, const std::vector<training::PreparedClip>& clips,
                            const EvalSetup& setup);

// One report per variant, in order. Throws std::invalid_argument for an
// empty variant list or a variant without a model (the message names it).
std::vector<EvalReport> run_ablation(const std::vector<VariantSpec>& variants,
                                     const std::vector<training::PreparedClip>& clips, const EvalSetup& setup);

// Aligned human-readable table, one row per report.
void write_table(std::ostream& os, const std::vector<EvalReport>& reports);
// "key=value" lines: aggregates, clip count, then per-clip rows.
void write_key_values(std::ostream& os, const EvalReport& report);

struct SignTest {
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t ties = 0;
  // One-sided P(at least `positive` successes) under Binomial(positive + negative, 1/2).
  double p_value = 1.0;
};

// Sign test of a[i] - b[i] > 0. Throws std::invalid_argument on length mismatch.
SignTest paired_sign_test(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace sanm::metrics
