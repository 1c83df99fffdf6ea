#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <iterator>

#include "sanm/data/clip.hpp"
#include "sanm/data/generator.hpp"

namespace sanm::data {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sanm_test_data_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

DataConfig small() {
  DataConfig c;
  c.identities = 2;
  c.train_per_identity = 6;
  c.eval_per_identity = 2;
  return c;
}

ClipErrorCode decode_error(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_clip(bytes);
  } catch (const ClipError& e) {
    return e.code();
  }
  ADD_FAILURE() << "decode succeeded";
  return ClipErrorCode::Io;
}

TEST(ClipFormat, RoundTripIsBitwise) {
  const auto ds = generate_dataset(small(), 3);
  const fs::path dir = scratch("roundtrip");
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& clip = ds.clips[i];
    save_clip(dir / "c.sclp", clip);
    const auto back = load_clip(dir / "c.sclp");
    EXPECT_EQ(back, clip);
    EXPECT_EQ(encode_clip(back), encode_clip(clip));
    EXPECT_EQ(reference_frame(back), reference_frame(clip));
  }
}

TEST(ClipFormat, HeaderAndMaskPacking) {
  const auto ds = generate_dataset(small(), 4);
  const auto bytes = encode_clip(ds.clips[0]);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "SCLP");
  EXPECT_EQ(mask_bytes_per_frame(16, 16), 32u);
  EXPECT_EQ(mask_bytes_per_frame(3, 3), 2u);
  const std::size_t pixels = 8 * 16 * 16 * 3 * 4;
  const std::size_t header = 4 + 4 + 16;
  const std::size_t mask_begin = header + pixels;
  std::uint32_t meta_len = 0;
  for (int b = 0; b < 4; ++b) meta_len |= std::uint32_t(bytes[mask_begin + 8 * 32 + b]) << (8 * b);
  EXPECT_EQ(bytes.size(), mask_begin + 8 * 32 + 4 + meta_len);
  // First set mask bit corresponds to the first glyph pixel of frame 0.
  const auto& m = ds.clips[0].mask;
  for (std::size_t i = 0; i < 256; ++i) {
    const bool bit = (bytes[mask_begin + i / 8] >> (i % 8)) & 1;
    ASSERT_EQ(bit, m[i] == 1.0);
  }
}

TEST(ClipFormat, DistinctErrors) {
  const auto ds = generate_dataset(small(), 5);
  const auto good = encode_clip(ds.clips[0]);

  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_EQ(decode_error(bad_magic), ClipErrorCode::BadMagic);

  auto bad_version = good;
  bad_version[4] = 9;
  EXPECT_EQ(decode_error(bad_version), ClipErrorCode::UnknownVersion);

  EXPECT_EQ(decode_error({good.begin(), good.begin() + 100}), ClipErrorCode::Truncated);
  EXPECT_EQ(decode_error({good.begin(), good.end() - 3}), ClipErrorCode::Truncated);

  auto bad_meta = good;
  bad_meta[bad_meta.size() - 1] = '#';
  EXPECT_EQ(decode_error(bad_meta), ClipErrorCode::CorruptMetadata);

  auto trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(decode_error(trailing), ClipErrorCode::CorruptMetadata);

  try {
    load_clip("/nonexistent/dir/clip.sclp");
    FAIL();
  } catch (const ClipError& e) {
    EXPECT_EQ(e.code(), ClipErrorCode::Io);
  }
}

TEST(ReferenceFrame, FirstFrame) {
  const auto ds = generate_dataset(small(), 6);
  const auto& clip = ds.clips[1];
  const Tensor ref = reference_frame(clip);
  ASSERT_EQ(ref.shape(), (Shape{16, 16, 3}));
  for (std::size_t i = 0; i < ref.numel(); ++i) ASSERT_EQ(ref[i], clip.frames[i]);

  SyntheticClip one = clip;
  one.frames = Tensor({1, 16, 16, 3}, std::vector<double>(clip.frames.storage().begin(),
                                                          clip.frames.storage().begin() + 768));
  EXPECT_EQ(reference_frame(one), ref);
  EXPECT_THROW(reference_frame(SyntheticClip{}), std::invalid_argument);
}

TEST(Glyphs, AreasFromGeometry) {
  for (auto shape : {GlyphShape::Square, GlyphShape::Diamond, GlyphShape::Disk}) {
    std::size_t count = 0;
    for (int dy = -kGlyphRadius; dy <= kGlyphRadius; ++dy)
      for (int dx = -kGlyphRadius; dx <= kGlyphRadius; ++dx) count += glyph_contains(shape, dx, dy);
    EXPECT_EQ(glyph_area(shape), count);
    EXPECT_EQ(glyph_from_code(glyph_code(shape)), shape);
  }
  EXPECT_EQ(glyph_area(GlyphShape::Square), 25u);
  EXPECT_EQ(glyph_area(GlyphShape::Diamond), 13u);
  EXPECT_EQ(glyph_area(GlyphShape::Disk), 21u);
}

TEST(Generator, CountsAndSplits) {
  DataConfig c;
  c.identities = 2;
  c.train_per_identity = 6;
  c.eval_per_identity = 2;
  const auto ds = generate_dataset(c, 7);
  EXPECT_EQ(ds.clips.size(), 16u);
  EXPECT_EQ(ds.split("train").size(), 12u);
  EXPECT_EQ(ds.split("eval").size(), 4u);
  const fs::path dir = scratch("counts");
  const auto written = write_dataset(dir, ds);
  EXPECT_EQ(written.size(), 17u);
  EXPECT_EQ(written.back(), fs::path("dataset.json"));
  const auto back = load_dataset(dir);
  EXPECT_EQ(back.identity_params.size(), 2u);
  EXPECT_EQ(back.clips, ds.clips);
}

TEST(Generator, SameSeedSameBytes) {
  const auto a = generate_dataset(small(), 8), b = generate_dataset(small(), 8);
  const fs::path da = scratch("det_a"), db = scratch("det_b");
  const auto files = write_dataset(da, a);
  write_dataset(db, b);
  for (const auto& f : files) EXPECT_EQ(read_bytes(da / f), read_bytes(db / f)) << f;
  EXPECT_NE(generate_dataset(small(), 9).clips[0], a.clips[0]);
}

TEST(Generator, MaskAreaMatchesGlyphAreaEveryFrame) {
  const auto ds = generate_dataset(DataConfig{}, 10);
  for (const auto& clip : ds.clips) {
    const auto shape = glyph_from_code(clip.identity_params[3]);
    const std::size_t hw = clip.height() * clip.width();
    for (std::size_t f = 0; f < clip.frame_count(); ++f) {
      std::size_t area = 0;
      for (std::size_t i = 0; i < hw; ++i) {
        const double v = clip.mask[f * hw + i];
        ASSERT_TRUE(v == 0.0 || v == 1.0);
        area += v == 1.0;
      }
      ASSERT_EQ(area, glyph_area(shape));
      // Every mask pixel lies at a glyph offset from the pose.
      const int cx = clip.pose_track[2 * f], cy = clip.pose_track[2 * f + 1];
      for (std::size_t i = 0; i < hw; ++i) {
        const int x = int(i % clip.width()), y = int(i / clip.width());
        ASSERT_EQ(clip.mask[f * hw + i] == 1.0, glyph_contains(shape, x - cx, y - cy));
      }
    }
  }
}

TEST(Generator, GlyphPixelsCarryIdentityColour) {
  const auto ds = generate_dataset(small(), 11);
  const auto& clip = ds.clips[0];
  const std::size_t hw = 256;
  for (std::size_t i = 0; i < hw; ++i) {
    if (clip.mask[i] != 1.0) continue;
    for (std::size_t c = 0; c < 3; ++c) {
      ASSERT_EQ(clip.frames[i * 3 + c], static_cast<double>(static_cast<float>(clip.identity_params[c])));
    }
  }
}

TEST(Generator, IdentitySeparabilityAndPoseSmoothness) {
  const auto ds = generate_dataset(DataConfig{}, 12);
  for (std::size_t a = 0; a < ds.identity_params.size(); ++a)
    for (std::size_t b = a + 1; b < ds.identity_params.size(); ++b) {
      double gap = 0.0;
      for (std::size_t k = 0; k < ds.identity_params[a].size(); ++k)
        gap = std::max(gap, std::abs(ds.identity_params[a][k] - ds.identity_params[b][k]));
      EXPECT_GE(gap, kIdentityMargin);
    }
  for (const auto& clip : ds.clips) {
    EXPECT_EQ(clip.identity_params, ds.identity_params[clip.identity_id]);
    for (std::size_t f = 1; f < clip.frame_count(); ++f) {
      const double dx = clip.pose_track[2 * f] - clip.pose_track[2 * f - 2];
      const double dy = clip.pose_track[2 * f + 1] - clip.pose_track[2 * f - 1];
      ASSERT_LE(std::hypot(dx, dy), 2.0);
    }
    for (double v : clip.frames.data()) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
  }
}

TEST(Generator, InvalidConfigRejected) {
  DataConfig c;
  c.identities = 1;
  EXPECT_THROW(generate_dataset(c, 1), std::invalid_argument);
  c = DataConfig{};
  c.height = 7;
  EXPECT_THROW(generate_dataset(c, 1), std::invalid_argument);
  c = DataConfig{};
  c.frames = 0;
  EXPECT_THROW(generate_dataset(c, 1), std::invalid_argument);
}

}  // namespace
}  // namespace sanm::data
