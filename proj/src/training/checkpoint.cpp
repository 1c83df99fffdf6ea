#include "sanm/training/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace sanm::training {

namespace {

constexpr char kMagic[4] = {'S', 'A', 'N', 'M'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

[[noreturn]] void fail(CheckpointErrorCode code, const std::string& what) {
  throw CheckpointError(code, "checkpoint: " + what);
}

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t.value;
  return nullptr;
}

const Tensor& Checkpoint::at(const std::string& name) const {
  const Tensor* t = find(name);
  if (t == nullptr) fail(CheckpointErrorCode::ManifestMismatch, "no tensor named " + name);
  return *t;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  nlohmann::json entries = nlohmann::json::array();
  std::size_t total = 0;
  for (const auto& t : ckpt.tensors) {
    entries.push_back({{"name", t.name}, {"shape", t.value.shape()}, {"dtype", "f32"}});
    total += t.value.numel();
  }
  const std::string manifest = nlohmann::json{{"tensors", entries}, {"metadata", ckpt.metadata}}.dump();

  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  out.reserve(12 + manifest.size() + 4 * total);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(manifest.size()));
  out.insert(out.end(), manifest.begin(), manifest.end());
  for (const auto& t : ckpt.tensors)
    for (double v : t.value.data()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) fail(CheckpointErrorCode::BadMagic, "bad magic");
  if (bytes.size() < 12) fail(CheckpointErrorCode::CorruptManifest, "header truncated");
  const std::uint32_t version = get_u32(bytes.data() + 4);
  if (version != kCheckpointVersion) fail(CheckpointErrorCode::UnknownVersion, "unknown version " + std::to_string(version));
  const std::size_t manifest_len = get_u32(bytes.data() + 8);
  if (bytes.size() - 12 < manifest_len) fail(CheckpointErrorCode::CorruptManifest, "manifest truncated");

  Checkpoint ckpt;
  std::vector<Shape> shapes;
  try {
    const auto m = nlohmann::json::parse(bytes.begin() + 12, bytes.begin() + 12 + static_cast<long>(manifest_len));
    for (const auto& e : m.at("tensors")) {
      if (e.at("dtype").get<std::string>() != "f32") fail(CheckpointErrorCode::CorruptManifest, "unsupported dtype");
      ckpt.tensors.push_back({e.at("name").get<std::string>(), Tensor()});
      shapes.push_back(e.at("shape").get<Shape>());
    }
    ckpt.metadata = m.at("metadata");
  } catch (const nlohmann::json::exception& e) {
    fail(CheckpointErrorCode::CorruptManifest, std::string("corrupt manifest: ") + e.what());
  }

  std::size_t total = 0;
  for (const auto& s : shapes) total += shape_numel(s);
  const std::size_t payload = bytes.size() - 12 - manifest_len;
  if (payload < 4 * total) fail(CheckpointErrorCode::TruncatedPayload, "truncated payload");
  if (payload > 4 * total) fail(CheckpointErrorCode::ManifestMismatch, "manifest mismatch: payload larger than manifest");

  const std::uint8_t* p = bytes.data() + 12 + manifest_len;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    std::vector<double> data(shape_numel(shapes[i]));
    for (auto& v : data) {
      v = std::bit_cast<float>(get_u32(p));
      p += 4;
    }
    ckpt.tensors[i].value = Tensor(shapes[i], std::move(data));
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(CheckpointErrorCode::Io, "cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) fail(CheckpointErrorCode::Io, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(CheckpointErrorCode::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

nlohmann::json model_config_to_json(const models::ModelConfig& c) {
  return {{"frames", c.frames},
          {"latent_h", c.latent_h},
          {"latent_w", c.latent_w},
          {"latent_c", c.latent_c},
          {"pixel_patch", c.pixel_patch},
          {"pixel_c", c.pixel_c},
          {"model_dim", c.model_dim},
          {"heads", c.heads},
          {"adapter_blocks", c.adapter_blocks},
          {"face_blocks", c.face_blocks},
          {"face_tokens", c.face_tokens},
          {"ff_mult", c.ff_mult},
          {"sigma_features", c.sigma_features},
          {"id_dim", c.id_dim},
          {"align", std::string(models::to_string(c.align))},
          {"temporal", c.temporal},
          {"sigma_data", c.sigma_data},
          {"decoder_hidden", c.decoder_hidden},
          {"embedder_hidden", c.embedder_hidden},
          {"embedder_patch", c.embedder_patch}};
}

models::ModelConfig model_config_from_json(const nlohmann::json& j) {
  models::ModelConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  try {
    get("frames", c.frames);
    get("latent_h", c.latent_h);
    get("latent_w", c.latent_w);
    get("latent_c", c.latent_c);
    get("pixel_patch", c.pixel_patch);
    get("pixel_c", c.pixel_c);
    get("model_dim", c.model_dim);
    get("heads", c.heads);
    get("adapter_blocks", c.adapter_blocks);
    get("face_blocks", c.face_blocks);
    get("face_tokens", c.face_tokens);
    get("ff_mult", c.ff_mult);
    get("sigma_features", c.sigma_features);
    get("id_dim", c.id_dim);
    if (j.contains("align")) c.align = models::parse_align_mode(j.at("align").get<std::string>());
    get("temporal", c.temporal);
    get("sigma_data", c.sigma_data);
    get("decoder_hidden", c.decoder_hidden);
    get("embedder_hidden", c.embedder_hidden);
    get("embedder_patch", c.embedder_patch);
  } catch (const nlohmann::json::exception& e) {
    fail(CheckpointErrorCode::CorruptManifest, std::string("bad model config: ") + e.what());
  }
  return c;
}

}  // namespace sanm::training
