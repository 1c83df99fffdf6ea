#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "sanm/numerics/tensor.hpp"

namespace sanm::data {

// One toy video: a coloured glyph (the "face") moving over a textured
// background.
struct SyntheticClip {
  Tensor frames;                         // [F, H, W, 3] in [0, 1]
  std::uint32_t identity_id = 0;
  std::vector<double> identity_params;   // r, g, b, shape code
  std::vector<std::int32_t> pose_track;  // F pairs (x, y): glyph centre in pixels
  Tensor mask;                           // [F, H, W] in {0, 1}: glyph pixels
  std::string split;                     // "train" or "eval"

  std::size_t frame_count() const { return frames.empty() ? 0 : frames.dim(0); }
  std::size_t height() const { return frames.dim(1); }
  std::size_t width() const { return frames.dim(2); }

  friend bool operator==(const SyntheticClip&, const SyntheticClip&) = default;
};

enum class ClipErrorCode { BadMagic, UnknownVersion, Truncated, CorruptMetadata, Io };

class ClipError : public std::runtime_error {
 public:
  ClipError(ClipErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ClipErrorCode code() const { return code_; }

 private:
  ClipErrorCode code_;
};

inline constexpr std::uint32_t kClipVersion = 1;

// Little-endian layout:
//   "SCLP" | u32 version | u32 F, H, W, C | F*H*W*C f32 pixels
//   | F * ceil(H*W/8) mask bytes (bit i of byte j is pixel 8j+i of the frame)
//   | u32 n | n bytes of UTF-8 JSON metadata
// Pixels are stored as f32, so frames must already be representable in f32
// for an exact round trip.
std::vector<std::uint8_t> encode_clip(const SyntheticClip& clip);
SyntheticClip decode_clip(const std::vector<std::uint8_t>& bytes);

void save_clip(const std::filesystem::path& path, const SyntheticClip& clip);
SyntheticClip load_clip(const std::filesystem::path& path);

// Bytes taken by one packed mask frame.
std::size_t mask_bytes_per_frame(std::size_t height, std::size_t width);

// Frame 0 as [H, W, 3]. Throws std::invalid_argument for an empty clip.
Tensor reference_frame(const SyntheticClip& clip);

}  // namespace sanm::data
