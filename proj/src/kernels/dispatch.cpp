#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "sanm/kernels.hpp"

namespace sanm::kernels {

#if defined(SANM_HAVE_AVX2)
namespace avx2 {
const KernelTable& table();
}
#endif
#if defined(SANM_HAVE_NEON)
namespace neon {
const KernelTable& table();
}
#endif

const KernelTable* avx2_table() {
#if defined(SANM_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2::table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_table() {
#if defined(SANM_HAVE_NEON)
  // Advanced SIMD is mandatory on AArch64.
  return &neon::table();
#else
  return nullptr;
#endif
}

std::vector<const KernelTable*> available_tables() {
  std::vector<const KernelTable*> out{&scalar_table()};
  if (const auto* t = avx2_table()) out.push_back(t);
  if (const auto* t = neon_table()) out.push_back(t);
  return out;
}

namespace {

const KernelTable* by_name(std::string_view name) {
  for (const auto* t : available_tables()) {
    if (name == t->name) return t;
  }
  return nullptr;
}

const KernelTable* initial_table() {
  if (const char* env = std::getenv("SANM_KERNELS"); env != nullptr && *env != '\0') {
    if (const auto* t = by_name(env)) return t;
    throw std::invalid_argument(std::string("SANM_KERNELS: unsupported kernel set '") + env + "'");
  }
  if (const auto* t = avx2_table()) return t;
  if (const auto* t = neon_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{initial_table()};
  return current;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_relaxed); }

void select(std::string_view name) {
  const auto* t = by_name(name);
  if (t == nullptr) {
    throw std::invalid_argument("unsupported kernel set '" + std::string(name) + "'");
  }
  slot().store(t, std::memory_order_relaxed);
}

void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, const KernelTable& t) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      t.axpy(arow[p], b + p * n, crow, n);
    }
  }
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, const KernelTable& t) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] += t.dot(a + i * k, b + j * k, k);
  }
}

void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, const KernelTable& t) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    const double* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      t.axpy(arow[p], brow, c + p * n, n);
    }
  }
}

}  // namespace sanm::kernels
