#include "req/diffcore/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

#include <cmath>

namespace req::kernels {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum_neon(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

void gemv_neon(const double* w, const double* bias, const double* x, double* out,
               std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = bias[r] + dot_neon(w + r * cols, x, cols);
}

void gemm_neon(const double* x, const double* b, const double* bias, double* y, std::size_t m,
               std::size_t k, std::size_t n) {
  for (std::size_t r = 0; r < m; ++r) {
    const double* xr = x + r * k;
    double* yr = y + r * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      float64x2_t a0 = bias ? vld1q_f64(bias + j) : vdupq_n_f64(0.0);
      float64x2_t a1 = bias ? vld1q_f64(bias + j + 2) : vdupq_n_f64(0.0);
      for (std::size_t p = 0; p < k; ++p) {
        const float64x2_t xv = vdupq_n_f64(xr[p]);
        a0 = vfmaq_f64(a0, xv, vld1q_f64(b + p * n + j));
        a1 = vfmaq_f64(a1, xv, vld1q_f64(b + p * n + j + 2));
      }
      vst1q_f64(yr + j, a0);
      vst1q_f64(yr + j + 2, a1);
    }
    for (; j < n; ++j) {
      double acc = bias ? bias[j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += xr[p] * b[p * n + j];
      yr[j] = acc;
    }
  }
}

// No vector exp on this path; matches the scalar reference exactly.
void elu_neon(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : std::expm1(x[i]);
}

}  // namespace

const KernelTable* neon_table() {
  static const KernelTable table{dot_neon, axpy_neon, sum_neon, gemv_neon, gemm_neon, elu_neon};
  return &table;
}

}  // namespace req::kernels

#else

namespace req::kernels {
const KernelTable* neon_table() { return nullptr; }
}  // namespace req::kernels

#endif
