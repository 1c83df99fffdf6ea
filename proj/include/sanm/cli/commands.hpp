#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sanm/cli/config.hpp"
#include "sanm/metrics/ablation.hpp"
#include "sanm/models/autoencoder.hpp"
#include "sanm/models/denoiser.hpp"
#include "sanm/models/identity_embedder.hpp"

namespace sanm::cli {

enum ExitCode : int { kOk = 0, kUsageError = 1, kVerifyFailed = 2, kIoError = 3 };

// Frozen networks produced by the pretrain command.
struct Pretrained {
  models::ModelConfig config;
  models::Autoencoder autoencoder;
  models::IdentityEmbedder embedder;
};

Pretrained load_pretrained(const std::filesystem::path& path);
models::DenoiserModel load_model(const std::filesystem::path& path);

struct GenerateOptions {
  std::optional<std::uint64_t> seed;
  std::filesystem::path out;
};
struct PretrainOptions {
  std::optional<std::filesystem::path> data;  // generated from [data] when absent
  std::filesystem::path out;
};
struct TrainOptions {
  std::filesystem::path data;
  std::filesystem::path pretrained;
  std::filesystem::path out;
  std::optional<std::size_t> epochs;
  std::optional<models::AlignMode> align;
};
struct SampleOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path pretrained;
  std::filesystem::path reference;  // clip file: conditioning and reference frame
  std::uint64_t seed = 0;
  bool guidance = true;
  std::filesystem::path out;
};
struct EvalOptions {
  std::vector<std::filesystem::path> checkpoints;
  std::filesystem::path pretrained;
  std::filesystem::path data;
  std::vector<std::string> variants = {"full", "no-opt"};
  std::filesystem::path out;
};

// Each command writes its artifacts plus config.ini and manifest.json under
// out. Errors surface as exceptions; run_cli maps them to exit codes.
void cmd_generate(const RunConfig& config, const GenerateOptions& options);
void cmd_pretrain(const RunConfig& config, const PretrainOptions& options);
void cmd_train(const RunConfig& config, const TrainOptions& options);
void cmd_sample(const RunConfig& config, const SampleOptions& options);
std::vector<metrics::EvalReport> cmd_eval(const RunConfig& config, const EvalOptions& options);
// Returns kOk when every check passes, kVerifyFailed otherwise.
int cmd_verify(const std::optional<std::filesystem::path>& report);

int run_cli(int argc, char** argv);

}  // namespace sanm::cli
