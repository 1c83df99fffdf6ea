#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "sanm/data/generator.hpp"
#include "sanm/models/config.hpp"
#include "sanm/sampler/guidance.hpp"
#include "sanm/schedule.hpp"
#include "sanm/training/pretrain.hpp"
#include "sanm/training/trainer.hpp"

namespace sanm::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScheduleConfig {
  std::size_t steps = 18;
  double sigma_min = 0.02;
  double sigma_max = 80.0;
  double rho = 7.0;
  ChurnParams churn = kStochasticChurn;
};

struct GuidanceSettings {
  bool enabled = true;
  double lr = 0.01;
  std::size_t k_steps = 10;
  std::string active_range = "all";  // "all" or "low,high"
  bool persistent_adam = false;
  bool reoptimize_correction = false;
};

// Every key of every section, with defaults. Sections: data, model, schedule,
// guidance, train, eval.
struct RunConfig {
  data::DataConfig data;
  std::uint64_t data_seed = 7;

  models::ModelConfig model;

  ScheduleConfig schedule;
  GuidanceSettings guidance;

  training::TrainConfig train;
  training::EmbedderPretrainConfig embedder;
  training::DecoderPretrainConfig decoder;

  std::uint64_t eval_seed = 1000;

  // Model dimensions that follow from the data section.
  models::ModelConfig model_config() const;
  EdmSchedule build() const;
  sampler::GuidanceConfig guidance_config() const;
  // Throws ConfigError when a cross-key constraint fails.
  void validate() const;
};

// Parses an INI file over the defaults. Throws ConfigError naming the
// offending key for unknown sections/keys and unparsable values.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::istream& is);

// The effective configuration as INI text, every key present.
std::string dump_config(const RunConfig& config);

std::optional<std::pair<double, double>> parse_active_range(const std::string& text);

}  // namespace sanm::cli
