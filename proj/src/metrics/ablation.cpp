#include "sanm/metrics/ablation.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "sanm/metrics/image_metrics.hpp"
#include "sanm/util/parallel.hpp"

namespace sanm::metrics {

std::vector<double> EvalReport::csim_values() const {
  std::vector<double> v;
  for (const auto& c : clips) v.push_back(c.csim);
  return v;
}

EvalReport evaluate_variant(const VariantSpec& variant, const std::vector<training::PreparedClip>& clips,
                            const EvalSetup& setup) {
  if (variant.model == nullptr) throw std::invalid_argument("evaluate: no checkpoint for variant " + variant.label);
  if (setup.decoder == nullptr || setup.embedder == nullptr) {
    throw std::invalid_argument("evaluate: decoder and embedder are required");
  }
  if (clips.empty()) throw std::invalid_argument("evaluate: empty evaluation set");

  EvalReport report;
  report.variant = variant.label;
  report.clips.resize(clips.size());
  util::parallel_for(clips.size(), [&](std::size_t i) {
    const auto& clip = clips[i];
    sampler::FaceGuidance guidance{setup.guidance, setup.decoder, setup.embedder};
    guidance.config.enabled = variant.guided;
    guidance.config.reference_embedding = clip.reference_embedding;
    const sampler::ModelDenoiser denoiser(*variant.model, clip.cond);
    const auto sample = sampler::edm_sample(denoiser, setup.schedule, clip.latent.shape(), &guidance, setup.seed + i);

    Tape tape;
    models::ParamBinder bind(tape);
    const Tensor pixels = setup.decoder->decode(bind, tape.constant(sample.x)).value();
    report.clips[i] = {i,
                       clip.identity_id,
                       l1_metric(pixels, clip.frames),
                       psnr_metric(pixels, clip.frames),
                       ssim_metric(pixels, clip.frames),
                       csim_against(pixels, clip.reference_embedding, *setup.embedder)};
  });
  for (const auto& c : report.clips) {
    report.l1 += c.l1;
    report.psnr += c.psnr;
    report.ssim += c.ssim;
    report.csim += c.csim;
  }
  const double n = static_cast<double>(report.clips.size());
  report.l1 /= n;
  report.psnr /= n;
  report.ssim /= n;
  report.csim /= n;
  return report;
}

std::vector<EvalReport> run_ablation(const std::vector<VariantSpec>& variants,
                                     const std::vector<training::PreparedClip>& clips, const EvalSetup& setup) {
  if (variants.empty()) throw std::invalid_argument("run_ablation: variant list is empty");
  for (const auto& v : variants)
    if (v.model == nullptr) throw std::invalid_argument("run_ablation: missing checkpoint for variant " + v.label);
  std::vector<EvalReport> out;
  for (const auto& v : variants) out.push_back(evaluate_variant(v, clips, setup));
  return out;
}

void write_table(std::ostream& os, const std::vector<EvalReport>& reports) {
  os << std::left << std::setw(12) << "variant" << std::right << std::setw(7) << "clips" << std::setw(10) << "L1"
     << std::setw(10) << "PSNR" << std::setw(10) << "SSIM" << std::setw(10) << "CSIM" << '\n';
  os << std::fixed << std::setprecision(4);
  for (const auto& r : reports) {
    os << std::left << std::setw(12) << r.variant << std::right << std::setw(7) << r.clips.size() << std::setw(10)
       << r.l1 << std::setw(10) << r.psnr << std::setw(10) << r.ssim << std::setw(10) << r.csim << '\n';
  }
  os.unsetf(std::ios::floatfield);
}

void write_key_values(std::ostream& os, const EvalReport& r) {
  os << std::setprecision(17);
  os << "variant=" << r.variant << '\n'
     << "clips=" << r.clips.size() << '\n'
     << "l1=" << r.l1 << '\n'
     << "psnr=" << r.psnr << '\n'
     << "ssim=" << r.ssim << '\n'
     << "csim=" << r.csim << '\n';
  for (const auto& c : r.clips) {
    os << "clip." << c.clip << ".identity=" << c.identity_id << '\n'
       << "clip." << c.clip << ".l1=" << c.l1 << '\n'
       << "clip." << c.clip << ".psnr=" << c.psnr << '\n'
       << "clip." << c.clip << ".ssim=" << c.ssim << '\n'
       << "clip." << c.clip << ".csim=" << c.csim << '\n';
  }
}

SignTest paired_sign_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired_sign_test: length mismatch");
  SignTest s;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i])
      ++s.positive;
    else if (a[i] < b[i])
      ++s.negative;
    else
      ++s.ties;
  }
  const std::size_t n = s.positive + s.negative;
  double p = 0.0;
  for (std::size_t k = s.positive; k <= n; ++k) {
    const double log_c = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    p += std::exp(log_c - static_cast<double>(n) * std::log(2.0));
  }
  s.p_value = std::min(1.0, p);
  return s;
}

}  // namespace sanm::metrics
