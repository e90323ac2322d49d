#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense inner-loop kernels used by the MLP forward/backward passes.
//
// Every kernel has a scalar reference implementation; SIMD variants (AVX2+FMA
// on x86-64, NEON on aarch64) are selected once at startup from the CPU's
// feature set. Results of the SIMD variants differ from the scalar ones only
// by floating-point reassociation.

namespace req::kernels {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // sum_i x[i]
  double (*sum)(const double* x, std::size_t n);
  // out[r] = bias[r] + dot(w[r, :], x) for r in [0, rows); w row-major rows x cols
  void (*gemv)(const double* w, const double* bias, const double* x, double* out,
               std::size_t rows, std::size_t cols);
  // y[r, j] = bias[j] + sum_k x[r, k] * b[k, j]; x is m x k, b is k x n,
  // y is m x n, all row-major. bias may be null (treated as zero).
  void (*gemm)(const double* x, const double* b, const double* bias, double* y, std::size_t m,
               std::size_t k, std::size_t n);
  // x[i] = x[i] > 0 ? x[i] : exp(x[i]) - 1, in place
  void (*elu)(double* x, std::size_t n);
};

const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in
const KernelTable* neon_table();  // nullptr when not compiled in

// Best ISA the running CPU supports among the compiled-in variants.
Isa detect_isa();

// Active table. Initialized from detect_isa(), or from the REQ_SIMD
// environment variable ("scalar", "avx2", "neon") when set.
const KernelTable& active();
Isa active_isa();

// Forces a table; throws std::invalid_argument if the ISA is unavailable.
void select(Isa isa);

std::string_view isa_name(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}
inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

}  // namespace req::kernels
