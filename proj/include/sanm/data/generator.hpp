#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sanm/data/clip.hpp"

namespace sanm::data {

enum class GlyphShape : std::uint8_t { Square = 0, Diamond = 1, Disk = 2 };

inline constexpr int kGlyphRadius = 2;
inline constexpr int kPoseMargin = 3;
// Minimum per-coordinate gap between identity parameter vectors.
inline constexpr double kIdentityMargin = 0.2;

// Does pixel offset (dx, dy) from the glyph centre belong to the glyph?
bool glyph_contains(GlyphShape shape, int dx, int dy);
// Pixel count of a fully visible glyph.
std::size_t glyph_area(GlyphShape shape);
GlyphShape glyph_from_code(double shape_code);
double glyph_code(GlyphShape shape);

struct DataConfig {
  std::size_t identities = 8;
  std::size_t train_per_identity = 8;
  std::size_t eval_per_identity = 3;
  std::size_t frames = 8;
  std::size_t height = 16;
  std::size_t width = 16;

  // Throws std::invalid_argument when fewer than 2 identities, frames smaller
  // than 8x8, or no frames.
  void validate() const;
};

struct Dataset {
  DataConfig config;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> identity_params;
  std::vector<SyntheticClip> clips;

  std::vector<const SyntheticClip*> split(const std::string& name) const;
};

// Renders every clip. Clip k draws from its own stream derived from the seed,
// so the output does not depend on generation order.
Dataset generate_dataset(const DataConfig& config, std::uint64_t seed);

// Writes clips/clip_NNNN.sclp plus dataset.json under `dir`. Returns the
// written paths relative to `dir`, manifest last.
std::vector<std::filesystem::path> write_dataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace sanm::data
