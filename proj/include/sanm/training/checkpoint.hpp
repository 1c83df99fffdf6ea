#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sanm/models/config.hpp"

namespace sanm::training {

struct NamedTensor {
  std::string name;
  Tensor value;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

struct Checkpoint {
  std::vector<NamedTensor> tensors;
  nlohmann::json metadata = nlohmann::json::object();

  const Tensor& at(const std::string& name) const;
  const Tensor* find(const std::string& name) const;
};

enum class CheckpointErrorCode { BadMagic, UnknownVersion, CorruptManifest, TruncatedPayload, ManifestMismatch, Io };

class CheckpointError : public std::runtime_error {
 public:
  CheckpointError(CheckpointErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  CheckpointErrorCode code() const { return code_; }

 private:
  CheckpointErrorCode code_;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Little-endian layout:
//   "SANM" | u32 version | u32 n | n bytes of JSON manifest
//   | f32 payload of every tensor in manifest order
// The manifest is {"tensors": [{"name", "shape", "dtype": "f32"}...], "metadata": {...}}.
// Values are rounded to f32 on save.
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Appends every weight of a model exposing a static visit(self, f).
template <class Model>
void append_params(std::vector<NamedTensor>& out, const Model& model) {
  Model::visit(model, [&](const std::string& name, const Tensor& t) { out.push_back({name, t}); });
}

// Overwrites every weight of `model` from the checkpoint, by name. Throws
// CheckpointError(ManifestMismatch) when a weight is missing or has another shape.
template <class Model>
void restore_params(Model& model, const Checkpoint& ckpt) {
  Model::visit(model, [&](const std::string& name, Tensor& t) {
    const Tensor* src = ckpt.find(name);
    if (src == nullptr || src->shape() != t.shape()) {
      throw CheckpointError(CheckpointErrorCode::ManifestMismatch, "checkpoint: missing or misshapen tensor " + name);
    }
    t = *src;
  });
}

nlohmann::json model_config_to_json(const models::ModelConfig& cfg);
// Keys absent from `j` keep their defaults.
models::ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace sanm::training
