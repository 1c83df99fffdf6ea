#include "sanm/numerics/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sanm {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

double to_unit(std::uint32_t w0, std::uint32_t w1) {
  const std::uint64_t k = (static_cast<std::uint64_t>(w0) << 21) ^ (static_cast<std::uint64_t>(w1) >> 11);
  return (static_cast<double>(k & ((1ULL << 53) - 1)) + 0.5) * 0x1.0p-53;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> key) {
  std::uint32_t k0 = key[0];
  std::uint32_t k1 = key[1];
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return c;
}

std::array<std::uint32_t, 4> SeededRng::block(std::uint64_t seed, std::uint64_t counter) {
  return philox4x32_10({static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32), 0u, 0u},
                       {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
}

double SeededRng::uniform() {
  const auto b = next_block();
  return to_unit(b[0], b[1]);
}

double SeededRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double SeededRng::normal() {
  const auto b = next_block();
  const double u0 = to_unit(b[0], b[1]);
  const double u1 = to_unit(b[2], b[3]);
  return std::sqrt(-2.0 * std::log(u0)) * std::cos(2.0 * std::numbers::pi * u1);
}

std::uint64_t SeededRng::next_u64() {
  const auto b = next_block();
  return (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
}

std::uint64_t SeededRng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("SeededRng::below: empty range");
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x < limit) return x % n;
  }
}

SeededRng SeededRng::derive(std::uint64_t stream) const {
  return SeededRng(splitmix64(seed_ ^ splitmix64(stream + 0x632BE59BD9B4E019ULL)), 0);
}

Tensor gaussian_sample(SeededRng& rng, const Shape& shape, double scale) {
  if (!(scale >= 0.0)) throw std::invalid_argument("gaussian_sample: negative scale");
  Tensor out(shape);
  const std::size_t n = out.numel();
  const std::uint64_t base = rng.counter();
  for (std::size_t j = 0; j < n; j += 2) {
    const auto b = SeededRng::block(rng.seed(), base + j / 2);
    const double u0 = to_unit(b[0], b[1]);
    const double u1 = to_unit(b[2], b[3]);
    const double r = std::sqrt(-2.0 * std::log(u0));
    const double a = 2.0 * std::numbers::pi * u1;
    out[j] = scale * r * std::cos(a);
    if (j + 1 < n) out[j + 1] = scale * r * std::sin(a);
  }
  rng = SeededRng(rng.seed(), base + (n + 1) / 2);
  return out;
}

}  // namespace sanm
