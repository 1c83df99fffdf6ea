#include "sanm/data/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "sanm/numerics/rng.hpp"

namespace sanm::data {

namespace {

constexpr std::uint32_t kDatasetVersion = 1;
constexpr std::uint64_t kIdentityStream = 0;
constexpr std::uint64_t kClipStreamBase = 1000;

double f32(double v) { return static_cast<double>(static_cast<float>(v)); }

// Saturated colours far from the mid-grey background, pairwise separated.
std::vector<std::vector<double>> sample_identities(std::size_t count, SeededRng rng) {
  std::vector<std::vector<double>> ids;
  for (std::size_t tries = 0; ids.size() < count; ++tries) {
    if (tries > 100000) throw std::runtime_error("generate_dataset: cannot place identities with the required margin");
    std::vector<double> c = {f32(rng.uniform(0.05, 0.95)), f32(rng.uniform(0.05, 0.95)),
                             f32(rng.uniform(0.05, 0.95)), glyph_code(static_cast<GlyphShape>(ids.size() % 3))};
    double contrast = 0.0;
    for (int k = 0; k < 3; ++k) contrast = std::max(contrast, std::abs(c[k] - 0.5));
    if (contrast < 0.35) continue;
    bool ok = true;
    for (const auto& other : ids) {
      double gap = 0.0;
      for (int k = 0; k < 3; ++k) gap = std::max(gap, std::abs(c[k] - other[k]));
      if (gap < 0.35) ok = false;
    }
    if (ok) ids.push_back(std::move(c));
  }
  return ids;
}

std::vector<std::int32_t> pose_track(const DataConfig& cfg, SeededRng& rng) {
  const int lo = kPoseMargin;
  const int hi_x = static_cast<int>(cfg.width) - 1 - kPoseMargin;
  const int hi_y = static_cast<int>(cfg.height) - 1 - kPoseMargin;
  int x = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi_x - lo + 1)));
  int y = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi_y - lo + 1)));
  int vx = static_cast<int>(rng.below(3)) - 1;
  int vy = static_cast<int>(rng.below(3)) - 1;
  std::vector<std::int32_t> track;
  for (std::size_t t = 0; t < cfg.frames; ++t) {
    track.push_back(x);
    track.push_back(y);
    if (rng.uniform() < 0.3) vx = static_cast<int>(rng.below(3)) - 1;
    if (rng.uniform() < 0.3) vy = static_cast<int>(rng.below(3)) - 1;
    if (x + vx < lo || x + vx > hi_x) vx = -vx;
    if (y + vy < lo || y + vy > hi_y) vy = -vy;
    x += vx;
    y += vy;
  }
  return track;
}

SyntheticClip render_clip(const DataConfig& cfg, std::uint32_t identity, const std::vector<double>& params,
                          SeededRng rng) {
  const std::size_t h = cfg.height, w = cfg.width, frames = cfg.frames;
  SyntheticClip clip;
  clip.identity_id = identity;
  clip.identity_params = params;
  clip.pose_track = pose_track(cfg, rng);
  clip.frames = Tensor({frames, h, w, 3});
  clip.mask = Tensor({frames, h, w});

  // Smooth grey texture: a coarse random grid, bilinearly interpolated, plus
  // faint per-pixel colour noise.
  constexpr std::size_t kGrid = 5;
  std::vector<double> grid(kGrid * kGrid);
  for (auto& g : grid) g = 0.5 + 0.15 * rng.uniform(-1.0, 1.0);
  std::vector<double> background(h * w * 3);
  for (std::size_t yy = 0; yy < h; ++yy) {
    for (std::size_t xx = 0; xx < w; ++xx) {
      const double gy = static_cast<double>(yy) * (kGrid - 1) / static_cast<double>(h - 1);
      const double gx = static_cast<double>(xx) * (kGrid - 1) / static_cast<double>(w - 1);
      const std::size_t y0 = std::min<std::size_t>(static_cast<std::size_t>(gy), kGrid - 2);
      const std::size_t x0 = std::min<std::size_t>(static_cast<std::size_t>(gx), kGrid - 2);
      const double fy = gy - static_cast<double>(y0), fx = gx - static_cast<double>(x0);
      const double grey = grid[y0 * kGrid + x0] * (1 - fy) * (1 - fx) + grid[(y0 + 1) * kGrid + x0] * fy * (1 - fx) +
                          grid[y0 * kGrid + x0 + 1] * (1 - fy) * fx + grid[(y0 + 1) * kGrid + x0 + 1] * fy * fx;
      for (int c = 0; c < 3; ++c) background[(yy * w + xx) * 3 + c] = grey + 0.02 * rng.uniform(-1.0, 1.0);
    }
  }
  const GlyphShape shape = glyph_from_code(params[3]);
  for (std::size_t t = 0; t < frames; ++t) {
    const int cx = clip.pose_track[2 * t], cy = clip.pose_track[2 * t + 1];
    for (std::size_t yy = 0; yy < h; ++yy) {
      for (std::size_t xx = 0; xx < w; ++xx) {
        const std::size_t p = yy * w + xx;
        const bool in = glyph_contains(shape, static_cast<int>(xx) - cx, static_cast<int>(yy) - cy);
        clip.mask[t * h * w + p] = in ? 1.0 : 0.0;
        for (int c = 0; c < 3; ++c) {
          clip.frames[(t * h * w + p) * 3 + c] = f32(in ? params[c] : background[p * 3 + c]);
        }
      }
    }
  }
  return clip;
}

}  // namespace

bool glyph_contains(GlyphShape shape, int dx, int dy) {
  switch (shape) {
    case GlyphShape::Square:
      return std::abs(dx) <= kGlyphRadius && std::abs(dy) <= kGlyphRadius;
    case GlyphShape::Diamond:
      return std::abs(dx) + std::abs(dy) <= kGlyphRadius;
    case GlyphShape::Disk:
      return dx * dx + dy * dy <= (kGlyphRadius + 0.5) * (kGlyphRadius + 0.5);
  }
  return false;
}

std::size_t glyph_area(GlyphShape shape) {
  std::size_t n = 0;
  for (int dy = -kGlyphRadius - 1; dy <= kGlyphRadius + 1; ++dy)
    for (int dx = -kGlyphRadius - 1; dx <= kGlyphRadius + 1; ++dx) n += glyph_contains(shape, dx, dy);
  return n;
}

GlyphShape glyph_from_code(double code) {
  if (code < 0.25) return GlyphShape::Square;
  if (code < 0.75) return GlyphShape::Diamond;
  return GlyphShape::Disk;
}

double glyph_code(GlyphShape shape) { return 0.5 * static_cast<double>(shape); }

void DataConfig::validate() const {
  if (identities < 2) throw std::invalid_argument("data: need at least 2 identities");
  if (height < 8 || width < 8) throw std::invalid_argument("data: frames must be at least 8x8");
  if (frames == 0) throw std::invalid_argument("data: frame count must be positive");
  if (train_per_identity + eval_per_identity == 0) throw std::invalid_argument("data: no clips requested");
}

std::vector<const SyntheticClip*> Dataset::split(const std::string& name) const {
  std::vector<const SyntheticClip*> out;
  for (const auto& c : clips)
    if (c.split == name) out.push_back(&c);
  return out;
}

Dataset generate_dataset(const DataConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const SeededRng master(seed);
  Dataset ds;
  ds.config = cfg;
  ds.seed = seed;
  ds.identity_params = sample_identities(cfg.identities, master.derive(kIdentityStream));
  const std::size_t per_id = cfg.train_per_identity + cfg.eval_per_identity;
  ds.clips.reserve(cfg.identities * per_id);
  for (std::size_t i = 0; i < cfg.identities; ++i) {
    for (std::size_t j = 0; j < per_id; ++j) {
      const std::size_t k = i * per_id + j;
      auto clip = render_clip(cfg, static_cast<std::uint32_t>(i), ds.identity_params[i],
                              master.derive(kClipStreamBase + k));
      clip.split = j < cfg.train_per_identity ? "train" : "eval";
      ds.clips.push_back(std::move(clip));
    }
  }
  return ds;
}

std::vector<std::filesystem::path> write_dataset(const std::filesystem::path& dir, const Dataset& ds) {
  std::filesystem::create_directories(dir / "clips");
  std::vector<std::filesystem::path> written;
  nlohmann::json clips = nlohmann::json::array();
  for (std::size_t k = 0; k < ds.clips.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "clip_%04zu.sclp", k);
    const auto rel = std::filesystem::path("clips") / name;
    save_clip(dir / rel, ds.clips[k]);
    written.push_back(rel);
    clips.push_back({{"file", rel.generic_string()}, {"identity_id", ds.clips[k].identity_id}, {"split", ds.clips[k].split}});
  }
  const auto& c = ds.config;
  nlohmann::json manifest = {{"format_version", kDatasetVersion},
                             {"seed", ds.seed},
                             {"identities", c.identities},
                             {"train_per_identity", c.train_per_identity},
                             {"eval_per_identity", c.eval_per_identity},
                             {"frames", c.frames},
                             {"height", c.height},
                             {"width", c.width},
                             {"clip_count", ds.clips.size()},
                             {"identity_params", ds.identity_params},
                             {"clips", clips}};
  std::ofstream os(dir / "dataset.json", std::ios::trunc);
  if (!os) throw ClipError(ClipErrorCode::Io, "dataset: cannot write manifest in " + dir.string());
  os << manifest.dump(2) << '\n';
  if (!os) throw ClipError(ClipErrorCode::Io, "dataset: manifest write failed");
  written.emplace_back("dataset.json");
  return written;
}

Dataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream is(dir / "dataset.json");
  if (!is) throw ClipError(ClipErrorCode::Io, "dataset: no dataset.json in " + dir.string());
  Dataset ds;
  try {
    const auto m = nlohmann::json::parse(is);
    if (m.at("format_version").get<std::uint32_t>() != kDatasetVersion) {
      throw ClipError(ClipErrorCode::UnknownVersion, "dataset: unknown format version");
    }
    ds.seed = m.at("seed").get<std::uint64_t>();
    ds.config.identities = m.at("identities").get<std::size_t>();
    ds.config.train_per_identity = m.at("train_per_identity").get<std::size_t>();
    ds.config.eval_per_identity = m.at("eval_per_identity").get<std::size_t>();
    ds.config.frames = m.at("frames").get<std::size_t>();
    ds.config.height = m.at("height").get<std::size_t>();
    ds.config.width = m.at("width").get<std::size_t>();
    ds.identity_params = m.at("identity_params").get<std::vector<std::vector<double>>>();
    for (const auto& entry : m.at("clips")) ds.clips.push_back(load_clip(dir / entry.at("file").get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw ClipError(ClipErrorCode::CorruptMetadata, std::string("dataset: corrupt manifest: ") + e.what());
  }
  return ds;
}

}  // namespace sanm::data
