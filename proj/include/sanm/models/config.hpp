#pragma once

#include <cstddef>

#include "sanm/models/id_adapter.hpp"

namespace sanm::models {

// Desk-scale dimensions. Latent frames are [latent_h, latent_w, latent_c];
// each latent cell decodes to a pixel_patch x pixel_patch RGB patch.
struct ModelConfig {
  std::size_t frames = 8;
  std::size_t latent_h = 4;
  std::size_t latent_w = 4;
  std::size_t latent_c = 8;
  std::size_t pixel_patch = 4;
  std::size_t pixel_c = 3;

  std::size_t model_dim = 32;
  std::size_t heads = 2;
  std::size_t adapter_blocks = 2;
  std::size_t face_blocks = 2;
  std::size_t face_tokens = 4;
  std::size_t ff_mult = 2;
  std::size_t sigma_features = 8;
  std::size_t id_dim = 8;
  AlignMode align = AlignMode::Full;
  bool temporal = true;
  double sigma_data = 0.5;

  std::size_t decoder_hidden = 32;
  std::size_t embedder_hidden = 32;
  std::size_t embedder_patch = 2;

  std::size_t tokens() const { return latent_h * latent_w; }
  std::size_t pixel_h() const { return latent_h * pixel_patch; }
  std::size_t pixel_w() const { return latent_w * pixel_patch; }
  std::size_t patch_values() const { return pixel_patch * pixel_patch * pixel_c; }

  Shape latent_shape() const { return {frames, latent_h, latent_w, latent_c}; }
  Shape pixel_shape() const { return {frames, pixel_h(), pixel_w(), pixel_c}; }
};

// Flat indices that gather a [frames, H, W, C] pixel tensor into rows of
// patch x patch x C values, one row per patch in row-major patch order.
std::vector<std::size_t> patchify_indices(std::size_t frames, std::size_t height, std::size_t width,
                                          std::size_t channels, std::size_t patch);
// The inverse permutation: gathers patch rows back into pixel layout.
std::vector<std::size_t> unpatchify_indices(std::size_t frames, std::size_t height, std::size_t width,
                                            std::size_t channels, std::size_t patch);

}  // namespace sanm::models
