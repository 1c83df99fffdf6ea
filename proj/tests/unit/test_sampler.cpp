#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "toy_models.hpp"
#include "sanm/sampler/edm.hpp"

namespace sanm::sampler {
namespace {

using sanm::testing::least_squares_optimum;
using sanm::testing::linear_guidance;
using sanm::testing::make_linear_toy;

class IdentityDenoiser final : public Denoiser {
 public:
  Tensor denoise(const Tensor& x, double) const override { return x; }
};

class ConstantDenoiser final : public Denoiser {
 public:
  explicit ConstantDenoiser(double a) : a_(a) {}
  Tensor denoise(const Tensor& x, double) const override { return Tensor(x.shape(), a_); }

 private:
  double a_;
};

FaceGuidance linear_face_guidance(const sanm::testing::LinearToy& toy, double lr = 0.01, std::size_t k = 10) {
  return FaceGuidance{linear_guidance(toy, lr, k), &toy.decoder, &toy.embedder};
}

// ---- face loss ----

TEST(FaceLoss, ReferenceMatchGivesZero) {
  const auto toy = make_linear_toy(1);
  Tape tape;
  models::ParamBinder bind(tape);
  const Tensor e = toy.embedder.embed(bind, toy.decoder.decode(bind, tape.constant(toy.x_pred))).value();
  EXPECT_NEAR(face_loss(toy.x_pred, e.reshaped({4}), toy.decoder, toy.embedder), 0.0, 1e-12);
}

TEST(FaceLoss, OrthogonalAndAntipodal) {
  const auto toy = make_linear_toy(2);
  Tape tape;
  models::ParamBinder bind(tape);
  Tensor e = toy.embedder.embed(bind, toy.decoder.decode(bind, tape.constant(toy.x_pred))).value().reshaped({4});
  EXPECT_NEAR(face_loss(toy.x_pred, -1.0 * e, toy.decoder, toy.embedder), 2.0, 1e-12);
  // Gram-Schmidt a second vector against e.
  Tensor o = Tensor::vector({1, -2, 0.5, 3});
  double dot = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < 4; ++i) dot += o[i] * e[i], nn += e[i] * e[i];
  for (std::size_t i = 0; i < 4; ++i) o[i] -= dot / nn * e[i];
  EXPECT_NEAR(face_loss(toy.x_pred, o, toy.decoder, toy.embedder), 1.0, 1e-12);
}

TEST(FaceLoss, RangeOverRandomInputs) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto toy = make_linear_toy(seed);
    const double l = face_loss(toy.x_pred, toy.reference, toy.decoder, toy.embedder);
    ASSERT_GE(l, 0.0);
    ASSERT_LE(l, 2.0);
  }
}

TEST(FaceLoss, DimensionMismatchThrows) {
  const auto toy = make_linear_toy(3);
  EXPECT_THROW(face_loss(toy.x_pred, Tensor({5}, 1.0), toy.decoder, toy.embedder), ShapeError);
  auto g = linear_guidance(toy);
  g.reference_embedding = Tensor({3}, 1.0);
  EXPECT_THROW(hjb_face_optimize(toy.x_pred, g, toy.decoder, toy.embedder), ShapeError);
}

// ---- hjb_face_optimize ----

TEST(HjbOptimize, ZeroStepsOrDisabledReturnInput) {
  const auto toy = make_linear_toy(4);
  auto g = linear_guidance(toy, 0.01, 0);
  EXPECT_EQ(hjb_face_optimize(toy.x_pred, g, toy.decoder, toy.embedder).x, toy.x_pred);
  g.k_steps = 10;
  g.enabled = false;
  EXPECT_EQ(hjb_face_optimize(toy.x_pred, g, toy.decoder, toy.embedder).x, toy.x_pred);
}

TEST(HjbOptimize, VanishingStepLeavesInput) {
  const auto toy = make_linear_toy(5);
  const auto r = hjb_face_optimize(toy.x_pred, linear_guidance(toy, 1e-14), toy.decoder, toy.embedder);
  for (std::size_t i = 0; i < toy.x_pred.numel(); ++i) EXPECT_NEAR(r.x[i], toy.x_pred[i], 1e-12);
}

TEST(HjbOptimize, InvalidConfigRejected) {
  const auto toy = make_linear_toy(6);
  auto g = linear_guidance(toy, 0.0);
  EXPECT_THROW(hjb_face_optimize(toy.x_pred, g, toy.decoder, toy.embedder), std::invalid_argument);
  g.lr = 0.01;
  g.active_sigma_range = std::pair{2.0, 1.0};
  EXPECT_THROW(g.validate(), std::invalid_argument);
}

TEST(HjbOptimize, LinearToyDecreasesEveryIterationOverSeeds) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto toy = make_linear_toy(5000 + seed);
    const auto r = hjb_face_optimize(toy.x_pred, linear_guidance(toy), toy.decoder, toy.embedder);
    ASSERT_EQ(r.loss_trace.size(), 11u);
    for (std::size_t k = 1; k < r.loss_trace.size(); ++k) ASSERT_LT(r.loss_trace[k], r.loss_trace[k - 1]) << seed;
    ASSERT_LT(r.loss_after, r.loss_before);

    // The least-squares solution of x M = r attains the global minimum 0,
    // and the optimized point sits between the start and that floor.
    const Tensor opt = least_squares_optimum(toy);
    const double floor = face_loss(opt, toy.reference, toy.decoder, toy.embedder);
    ASSERT_NEAR(floor, 0.0, 1e-10);
    ASSERT_GT(r.loss_after, floor);
  }
}

TEST(HjbOptimize, DoesNotTouchNetworks) {
  const auto toy = make_linear_toy(7);
  const Tensor a = toy.decoder.matrix(), b = toy.embedder.matrix();
  hjb_face_optimize(toy.x_pred, linear_guidance(toy), toy.decoder, toy.embedder);
  EXPECT_EQ(toy.decoder.matrix(), a);
  EXPECT_EQ(toy.embedder.matrix(), b);
}

TEST(HjbOptimize, PersistentStateAccumulatesSteps) {
  const auto toy = make_linear_toy(8);
  AdamState st;
  hjb_face_optimize(toy.x_pred, linear_guidance(toy), toy.decoder, toy.embedder, &st);
  hjb_face_optimize(toy.x_pred, linear_guidance(toy), toy.decoder, toy.embedder, &st);
  EXPECT_EQ(st.step_count, 20u);
}

TEST(GuidanceConfig, ActiveRange) {
  GuidanceConfig g;
  EXPECT_FALSE(g.active_at(1.0));
  g.enabled = true;
  EXPECT_TRUE(g.active_at(1.0));
  g.active_sigma_range = std::pair{0.5, 2.0};
  EXPECT_TRUE(g.active_at(2.0));
  EXPECT_FALSE(g.active_at(2.5));
  g.k_steps = 0;
  EXPECT_FALSE(g.active_at(1.0));
}

// ---- edm_step ----

TEST(EdmStep, FixedPointDenoiserReturnsNoisedInput) {
  const auto sched = build_schedule(10, 0.02, 80.0, 7.0, ChurnParams{40.0, 1.0, 0.0, 1e30});
  SeededRng r1(3), r2(3);
  const Tensor x = gaussian_sample(r1, {6}, 5.0);
  r2 = r1;
  const auto step = edm_step(IdentityDenoiser{}, sched, 2, x, nullptr, r1);
  const double t = sched.sigma(2), th = step.record.t_hat;
  const Tensor x_hat = x + std::sqrt(th * th - t * t) * gaussian_sample(r2, {6}, 1.0);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(step.x_next[i], x_hat[i], 1e-12);
  EXPECT_GT(step.record.gamma, 0.0);
}

TEST(EdmStep, NoChurnIsDeterministicHeun) {
  const auto sched = build_schedule(5, 0.1, 10.0, 7.0);
  const GaussianDenoiser den(0.4, 0.8);
  const Tensor x = Tensor::vector({1.0, -3.0, 7.5});
  SeededRng rng(1);
  const auto step = edm_step(den, sched, 1, x, nullptr, rng);
  EXPECT_EQ(step.record.gamma, 0.0);
  EXPECT_EQ(step.record.t_hat, step.record.t);
  const double t = sched.sigma(1), tn = sched.sigma(2);
  for (std::size_t i = 0; i < 3; ++i) {
    auto D = [&](double v, double s) { return (0.64 * v + s * s * 0.4) / (0.64 + s * s); };
    const double d = (x[i] - D(x[i], t)) / t;
    const double xe = x[i] + (tn - t) * d;
    const double d2 = (xe - D(xe, tn)) / tn;
    EXPECT_NEAR(step.x_next[i], x[i] + (tn - t) * 0.5 * (d + d2), 1e-12);
  }
}

TEST(EdmStep, OutOfRangeIndexThrows) {
  const auto sched = build_schedule(3);
  SeededRng rng(1);
  EXPECT_THROW(edm_step(IdentityDenoiser{}, sched, 3, Tensor({1}), nullptr, rng), std::out_of_range);
}

TEST(EdmStep, GuidanceWithoutNetworksThrows) {
  const auto sched = build_schedule(3);
  FaceGuidance g;
  g.config.enabled = true;
  SeededRng rng(1);
  EXPECT_THROW(edm_step(IdentityDenoiser{}, sched, 0, Tensor({1}), &g, rng), std::invalid_argument);
}

TEST(EdmStep, OptimizationConsumesNoRandomness) {
  const auto toy = make_linear_toy(9);
  const auto sched = build_schedule(6, 0.02, 80.0, 7.0, kStochasticChurn);
  const auto g = linear_face_guidance(toy);
  const GaussianDenoiser den(0.0, 1.0);
  SeededRng a(11), b(11);
  const auto on = edm_step(den, sched, 2, toy.x_pred, &g, a);
  const auto off = edm_step(den, sched, 2, toy.x_pred, nullptr, b);
  EXPECT_EQ(a.counter(), b.counter());
  EXPECT_EQ(on.record.t_hat, off.record.t_hat);
  EXPECT_NE(on.x_next, off.x_next);
  EXPECT_LT(on.record.loss_after, on.record.loss_before);
}

TEST(EdmStep, CorrectionReoptimizationIsOptIn) {
  const auto toy = make_linear_toy(10);
  const auto sched = build_schedule(6, 0.02, 80.0, 7.0);
  auto g = linear_face_guidance(toy);
  const GaussianDenoiser den(0.0, 1.0);
  SeededRng a(12), b(12);
  const auto plain = edm_step(den, sched, 1, toy.x_pred, &g, a);
  g.config.reoptimize_correction = true;
  const auto reopt = edm_step(den, sched, 1, toy.x_pred, &g, b);
  EXPECT_NE(plain.x_next, reopt.x_next);
}

// ---- edm_sample ----

TEST(EdmSample, SingleStepLandsOnPrediction) {
  const auto sched = build_schedule(1, 0.02, 80.0);
  const auto out = edm_sample(ConstantDenoiser(0.75), sched, {2, 3}, nullptr, 99);
  EXPECT_EQ(out.x, Tensor({2, 3}, 0.75));
  ASSERT_EQ(out.record.steps.size(), 1u);
}

TEST(EdmSample, SameSeedIsBitwiseIdentical) {
  const auto toy = make_linear_toy(11);
  const auto sched = build_schedule(8, 0.02, 80.0, 7.0, kStochasticChurn);
  const auto g = linear_face_guidance(toy);
  const GaussianDenoiser den(0.2, 0.7);
  const auto a = edm_sample(den, sched, toy.x_pred.shape(), &g, 5);
  const auto b = edm_sample(den, sched, toy.x_pred.shape(), &g, 5);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.record.steps, b.record.steps);
  EXPECT_EQ(a.record.steps.size(), 8u);
  EXPECT_NE(edm_sample(den, sched, toy.x_pred.shape(), &g, 6).x, a.x);
}

TEST(EdmSample, GuidanceOffMatchesPlainSamplerBitwise) {
  const auto toy = make_linear_toy(12);
  const auto sched = build_schedule(8, 0.02, 80.0, 7.0, kStochasticChurn);
  auto g = linear_face_guidance(toy);
  g.config.enabled = false;
  const GaussianDenoiser den(0.2, 0.7);
  EXPECT_EQ(edm_sample(den, sched, {1, 2, 2, 2}, &g, 3).x, edm_sample(den, sched, {1, 2, 2, 2}, nullptr, 3).x);
}

TEST(EdmSample, PersistentAdamChangesTrajectory) {
  const auto toy = make_linear_toy(13);
  const auto sched = build_schedule(6, 0.02, 80.0, 7.0);
  auto g = linear_face_guidance(toy);
  const GaussianDenoiser den(0.0, 1.0);
  const auto fresh = edm_sample(den, sched, {1, 2, 2, 2}, &g, 4);
  g.config.persistent_adam = true;
  EXPECT_NE(edm_sample(den, sched, {1, 2, 2, 2}, &g, 4).x, fresh.x);
}

TEST(EdmSample, StochasticGaussianMomentsWithinThreeStandardErrors) {
  const double m = 0.5, s = 0.8;
  const std::size_t n = 10000;
  const auto sched = build_schedule(64, 0.02, 80.0, 7.0, kStochasticChurn);
  const auto out = edm_sample(GaussianDenoiser(m, s), sched, {n}, nullptr, 2024);
  double mean = 0.0;
  for (double v : out.x.data()) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : out.x.data()) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / (n - 1));
  EXPECT_LT(std::abs(mean - m), 3.0 * s / std::sqrt(double(n)));
  EXPECT_LT(std::abs(sd - s), 3.0 * s / std::sqrt(2.0 * (n - 1)));
}

// Probability-flow ODE for N(m, s^2) data has the closed-form endpoint
// m + (x0 - m) s / sqrt(s^2 + t0^2).
double heun_endpoint_error(std::size_t steps) {
  const double m = 0.3, s = 1.0;
  const auto sched = build_schedule(steps, 0.02, 20.0, 1.0);
  const Tensor x0 = Tensor::vector({-30.0, -5.0, 0.0, 12.0, 41.0});
  SeededRng rng(0);
  Tensor x = x0;
  for (std::size_t i = 0; i < steps; ++i) x = edm_step(GaussianDenoiser(m, s), sched, i, x, nullptr, rng).x_next;
  double err = 0.0;
  for (std::size_t i = 0; i < x0.numel(); ++i) {
    const double exact = m + (x0[i] - m) * s / std::sqrt(s * s + 400.0);
    err = std::max(err, std::abs(x[i] - exact));
  }
  return err;
}

TEST(EdmSample, HeunSecondOrderConvergence) {
  const double e8 = heun_endpoint_error(8), e16 = heun_endpoint_error(16), e32 = heun_endpoint_error(32);
  EXPECT_GE(e8 / e16, 3.0);
  EXPECT_LE(e8 / e16, 5.0);
  EXPECT_GE(e16 / e32, 3.0);
  EXPECT_LE(e16 / e32, 5.0);
}

TEST(EdmSample, ModelDenoiserWithGuidanceRuns) {
  models::ModelConfig cfg;
  cfg.frames = 2;
  SeededRng r(14);
  const auto model = models::DenoiserModel::random(cfg, r);
  const auto dec = models::ToyDecoder::random(cfg, r);
  const auto emb = models::IdentityEmbedder::random(cfg, r);
  models::DenoiserCond cond{gaussian_sample(r, {cfg.tokens(), cfg.latent_c}, 1.0), Tensor({cfg.id_dim}, 0.5),
                            Tensor({2, 2}, 8.0)};
  FaceGuidance g{GuidanceConfig{}, &dec, &emb};
  g.config.enabled = true;
  g.config.k_steps = 3;
  g.config.reference_embedding = Tensor({cfg.id_dim}, 0.5);
  const auto out = edm_sample(ModelDenoiser(model, cond), build_schedule(4), {2, 4, 4, cfg.latent_c}, &g, 1);
  for (double v : out.x.data()) ASSERT_TRUE(std::isfinite(v));
  for (const auto& s : out.record.steps) EXPECT_LE(s.loss_after, s.loss_before + 1e-9);
}

TEST(TrajectoryRecord, TableHasHeaderAndOneRowPerStep) {
  const auto out = edm_sample(GaussianDenoiser(0, 1), build_schedule(5), {3}, nullptr, 1);
  std::ostringstream os;
  out.record.write_table(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "# step t_i gamma loss_before loss_after");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 5u);
}

}  // namespace
}  // namespace sanm::sampler
