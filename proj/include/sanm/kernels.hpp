#pragma once

// Dense double-precision inner loops.
//
// Every kernel has a scalar reference implementation. Vector variants
// (AVX2+FMA on x86-64, NEON on AArch64) are compiled into separate
// translation units and selected once at runtime. Vector variants may
// reassociate sums, so results agree with the scalar reference to rounding,
// not bitwise. Within one process the selected table never changes, which
// keeps every higher-level computation bit-reproducible.
//
// Selection order: SANM_KERNELS environment variable ("scalar", "avx2",
// "neon"), otherwise the widest variant the CPU supports.

#include <cstddef>
#include <string_view>
#include <vector>

namespace sanm::kernels {

struct KernelTable {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  // out = a * b (elementwise)
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  // out = a + b
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  // x *= alpha
  void (*scale)(double alpha, double* x, std::size_t n);
};

const KernelTable& scalar_table();

// nullptr when the variant is not compiled in or the CPU lacks support.
const KernelTable* avx2_table();
const KernelTable* neon_table();

// Tables usable on this machine, scalar first.
std::vector<const KernelTable*> available_tables();

// The process-wide table.
const KernelTable& active();

// Forces a table by name for the rest of the process. Throws
// std::invalid_argument for an unknown or unsupported name.
void select(std::string_view name);

// Row-major matrix products built on the active table. All accumulate into C.
// C[m,n] += A[m,k] * B[k,n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, const KernelTable& t = active());
// C[m,n] += A[m,k] * B[n,k]^T
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, const KernelTable& t = active());
// C[k,n] += A[m,k]^T * B[m,n]
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, const KernelTable& t = active());

}  // namespace sanm::kernels
