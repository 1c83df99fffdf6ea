#include "sanm/data/clip.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

namespace sanm::data {

namespace {

constexpr char kMagic[4] = {'S', 'C', 'L', 'P'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, double v) {
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) throw ClipError(ClipErrorCode::Truncated, std::string("clip: truncated ") + what);
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  const std::uint8_t* take(std::size_t n, const char* what) {
    need(n, what);
    const std::uint8_t* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t mask_bytes_per_frame(std::size_t height, std::size_t width) { return (height * width + 7) / 8; }

std::vector<std::uint8_t> encode_clip(const SyntheticClip& clip) {
  const Tensor& f = clip.frames;
  if (f.rank() != 4) throw ShapeError("clip: frames must be [F, H, W, C]");
  const std::size_t frames = f.dim(0), h = f.dim(1), w = f.dim(2);
  if (clip.mask.shape() != Shape{frames, h, w}) throw ShapeError("clip: mask must be [F, H, W]");
  if (clip.pose_track.size() != 2 * frames) throw ShapeError("clip: pose track needs one (x, y) per frame");

  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_u32(out, kClipVersion);
  for (std::size_t d : f.shape()) put_u32(out, static_cast<std::uint32_t>(d));
  out.reserve(out.size() + 4 * f.numel() + frames * mask_bytes_per_frame(h, w) + 256);
  for (double v : f.data()) put_f32(out, v);

  const std::size_t per_frame = mask_bytes_per_frame(h, w);
  for (std::size_t t = 0; t < frames; ++t) {
    std::vector<std::uint8_t> packed(per_frame, 0);
    for (std::size_t i = 0; i < h * w; ++i) {
      if (clip.mask[t * h * w + i] != 0.0) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    }
    out.insert(out.end(), packed.begin(), packed.end());
  }

  nlohmann::json meta = {{"identity_id", clip.identity_id},
                         {"identity_params", clip.identity_params},
                         {"pose_track", clip.pose_track},
                         {"split", clip.split}};
  const std::string text = meta.dump();
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  return out;
}

SyntheticClip decode_clip(const std::vector<std::uint8_t>& bytes) {
  Reader in(bytes);
  const std::uint8_t* magic = in.take(4, "header");
  if (std::memcmp(magic, kMagic, 4) != 0) throw ClipError(ClipErrorCode::BadMagic, "clip: bad magic");
  const std::uint32_t version = in.u32("header");
  if (version != kClipVersion) {
    throw ClipError(ClipErrorCode::UnknownVersion, "clip: unknown version " + std::to_string(version));
  }
  Shape shape(4);
  for (auto& d : shape) d = in.u32("header");
  const std::size_t frames = shape[0], h = shape[1], w = shape[2];

  SyntheticClip clip;
  const std::size_t n = shape_numel(shape);
  in.need(4 * n, "pixels");
  std::vector<double> pixels(n);
  for (auto& v : pixels) v = in.f32("pixels");
  clip.frames = Tensor(shape, std::move(pixels));

  const std::size_t per_frame = mask_bytes_per_frame(h, w);
  const std::uint8_t* packed = in.take(frames * per_frame, "mask");
  clip.mask = Tensor({frames, h, w});
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t i = 0; i < h * w; ++i) {
      clip.mask[t * h * w + i] = (packed[t * per_frame + i / 8] >> (i % 8)) & 1u ? 1.0 : 0.0;
    }
  }

  const std::uint32_t meta_len = in.u32("metadata length");
  const std::uint8_t* text = in.take(meta_len, "metadata");
  if (in.remaining() != 0) throw ClipError(ClipErrorCode::CorruptMetadata, "clip: trailing bytes after metadata");
  try {
    const auto meta = nlohmann::json::parse(text, text + meta_len);
    clip.identity_id = meta.at("identity_id").get<std::uint32_t>();
    clip.identity_params = meta.at("identity_params").get<std::vector<double>>();
    clip.pose_track = meta.at("pose_track").get<std::vector<std::int32_t>>();
    clip.split = meta.at("split").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ClipError(ClipErrorCode::CorruptMetadata, std::string("clip: corrupt metadata: ") + e.what());
  }
  if (clip.pose_track.size() != 2 * frames) {
    throw ClipError(ClipErrorCode::CorruptMetadata, "clip: pose track length does not match frame count");
  }
  return clip;
}

void save_clip(const std::filesystem::path& path, const SyntheticClip& clip) {
  const auto bytes = encode_clip(clip);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ClipError(ClipErrorCode::Io, "clip: cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw ClipError(ClipErrorCode::Io, "clip: write failed for " + path.string());
}

SyntheticClip load_clip(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ClipError(ClipErrorCode::Io, "clip: cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_clip(bytes);
}

Tensor reference_frame(const SyntheticClip& clip) {
  if (clip.frame_count() == 0) throw std::invalid_argument("reference_frame: empty clip");
  const Shape& s = clip.frames.shape();
  const std::size_t n = s[1] * s[2] * s[3];
  std::vector<double> data(clip.frames.storage().begin(), clip.frames.storage().begin() + static_cast<long>(n));
  return Tensor({s[1], s[2], s[3]}, std::move(data));
}

}  // namespace sanm::data
