// Measured gates on the default toy task. One process builds the pipeline
// once and every test reads it.

#include <gtest/gtest.h>

#include "pipeline.hpp"

namespace sanm::training {
namespace {

const sanm::testing::ToyPipeline& pipeline() {
  static const auto p = sanm::testing::build_pipeline();
  return p;
}

TEST(Gates, DecoderHeldOutPsnr) {
  const auto& p = pipeline();
  EXPECT_GE(reconstruction_psnr(p.autoencoder, p.dataset.split("eval")), 25.0);
}

TEST(Gates, EmbedderHeldOutSeparation) {
  const auto& p = pipeline();
  const auto sep = embedder_separation(p.embedder, p.dataset.split("eval"));
  EXPECT_GT(sep.same_pairs, 0u);
  EXPECT_GT(sep.diff_pairs, 0u);
  EXPECT_GE(sep.same_mean, 0.9);
  EXPECT_LE(sep.diff_mean, 0.5);
}

TEST(Gates, TwoIdentityEmbedderGap) {
  data::DataConfig dc;
  dc.identities = 2;
  const auto ds = data::generate_dataset(dc, 21);
  SeededRng rng(22);
  const auto emb = pretrain_identity_embedder(ds.split("train"), models::ModelConfig{}, EmbedderPretrainConfig{}, rng);
  const auto sep = embedder_separation(emb, ds.split("eval"));
  EXPECT_GE(sep.same_mean - sep.diff_mean, 0.4);
}

TEST(Gates, TwentyEpochsHalveTheLoss) {
  const auto& p = pipeline();
  TrainConfig tc;
  auto state = TrainState::init(p.model, tc);
  const double first = train_epoch(state, p.train, tc).mean_loss;
  double last = first;
  for (std::size_t e = 1; e < 20; ++e) last = train_epoch(state, p.train, tc).mean_loss;
  EXPECT_LE(last, 0.5 * first) << "epoch 1 " << first << ", epoch 20 " << last;
}

}  // namespace
}  // namespace sanm::training
