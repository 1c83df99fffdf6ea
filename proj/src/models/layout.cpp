#include <stdexcept>

#include "sanm/models/config.hpp"

namespace sanm::models {

std::vector<std::size_t> patchify_indices(std::size_t frames, std::size_t height, std::size_t width,
                                          std::size_t channels, std::size_t patch) {
  if (patch == 0 || height % patch != 0 || width % patch != 0) {
    throw std::invalid_argument("patchify: frame size not divisible by patch size");
  }
  std::vector<std::size_t> idx;
  idx.reserve(frames * height * width * channels);
  for (std::size_t f = 0; f < frames; ++f)
    for (std::size_t pi = 0; pi < height / patch; ++pi)
      for (std::size_t pj = 0; pj < width / patch; ++pj)
        for (std::size_t y = 0; y < patch; ++y)
          for (std::size_t x = 0; x < patch; ++x)
            for (std::size_t c = 0; c < channels; ++c)
              idx.push_back(((f * height + pi * patch + y) * width + pj * patch + x) * channels + c);
  return idx;
}

std::vector<std::size_t> unpatchify_indices(std::size_t frames, std::size_t height, std::size_t width,
                                            std::size_t channels, std::size_t patch) {
  const auto fwd = patchify_indices(frames, height, width, channels, patch);
  std::vector<std::size_t> inv(fwd.size());
  for (std::size_t j = 0; j < fwd.size(); ++j) inv[fwd[j]] = j;
  return inv;
}

}  // namespace sanm::models
