#pragma once

// Counter-based random stream.
//
// Generator: Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy
// as 1, 2, 3"). The 64-bit seed is the key; the 64-bit counter fills the low
// two words of the 128-bit counter block. Each block yields four 32-bit words.
//
//   uniform:  words (w0, w1) -> ((w0 << 21) ^ (w1 >> 11)) in 53 bits,
//             mapped to (k + 0.5) * 2^-53, strictly inside (0, 1)
//   normal:   Box-Muller on the two uniforms of one block,
//             n0 = r cos(2 pi u1), n1 = r sin(2 pi u1), r = sqrt(-2 ln u0)
//
// Draw j of a gaussian_sample() request uses block (counter + j / 2); the
// request then advances the counter by ceil(n / 2). Nothing else is hidden
// in the object, so (seed, counter) fully determines every output.

#include <array>
#include <cstdint>

#include "sanm/numerics/tensor.hpp"

namespace sanm {

// The raw bijection, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0, std::uint64_t counter = 0) : seed_(seed), counter_(counter) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  // Raw Philox block at an explicit counter value.
  static std::array<std::uint32_t, 4> block(std::uint64_t seed, std::uint64_t counter);

  std::array<std::uint32_t, 4> next_block() { return block(seed_, counter_++); }
  double uniform();               // (0, 1)
  double uniform(double lo, double hi);
  double normal();                // N(0, 1), one block per call
  std::uint64_t next_u64();
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  // Independent stream keyed by (seed, stream id); does not touch this one.
  SeededRng derive(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

// i.i.d. N(0, scale^2) draws. Throws std::invalid_argument when scale < 0.
Tensor gaussian_sample(SeededRng& rng, const Shape& shape, double scale);

}  // namespace sanm
