#include "req/diffcore/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

#include <cmath>

namespace req::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

// Four output rows at a time so each load of x feeds four FMAs.
void gemv_avx2(const double* w, const double* bias, const double* x, double* out,
               std::size_t rows, std::size_t cols) {
  std::size_t r = 0;
  for (; r + 4 <= rows; r += 4) {
    const double* w0 = w + r * cols;
    const double* w1 = w0 + cols;
    const double* w2 = w1 + cols;
    const double* w3 = w2 + cols;
    __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      const __m256d xv = _mm256_loadu_pd(x + c);
      a0 = _mm256_fmadd_pd(_mm256_loadu_pd(w0 + c), xv, a0);
      a1 = _mm256_fmadd_pd(_mm256_loadu_pd(w1 + c), xv, a1);
      a2 = _mm256_fmadd_pd(_mm256_loadu_pd(w2 + c), xv, a2);
      a3 = _mm256_fmadd_pd(_mm256_loadu_pd(w3 + c), xv, a3);
    }
    double s0 = hsum(a0), s1 = hsum(a1), s2 = hsum(a2), s3 = hsum(a3);
    for (; c < cols; ++c) {
      s0 += w0[c] * x[c];
      s1 += w1[c] * x[c];
      s2 += w2[c] * x[c];
      s3 += w3[c] * x[c];
    }
    out[r] = bias[r] + s0;
    out[r + 1] = bias[r + 1] + s1;
    out[r + 2] = bias[r + 2] + s2;
    out[r + 3] = bias[r + 3] + s3;
  }
  for (; r < rows; ++r) out[r] = bias[r] + dot_avx2(w + r * cols, x, cols);
}

// Up to four rows of y against one 8-column panel of b; each broadcast of x
// feeds two FMAs and each panel load feeds up to four.
template <int R>
void gemm_block8(const double* x, const double* b, const double* bias, double* y, std::size_t k,
                 std::size_t n, std::size_t j) {
  __m256d acc[R][2];
  const __m256d b0 = bias ? _mm256_loadu_pd(bias + j) : _mm256_setzero_pd();
  const __m256d b1 = bias ? _mm256_loadu_pd(bias + j + 4) : _mm256_setzero_pd();
  for (int r = 0; r < R; ++r) {
    acc[r][0] = b0;
    acc[r][1] = b1;
  }
  for (std::size_t p = 0; p < k; ++p) {
    const __m256d w0 = _mm256_loadu_pd(b + p * n + j);
    const __m256d w1 = _mm256_loadu_pd(b + p * n + j + 4);
    for (int r = 0; r < R; ++r) {
      const __m256d xv = _mm256_broadcast_sd(x + r * k + p);
      acc[r][0] = _mm256_fmadd_pd(xv, w0, acc[r][0]);
      acc[r][1] = _mm256_fmadd_pd(xv, w1, acc[r][1]);
    }
  }
  for (int r = 0; r < R; ++r) {
    _mm256_storeu_pd(y + r * n + j, acc[r][0]);
    _mm256_storeu_pd(y + r * n + j + 4, acc[r][1]);
  }
}

template <int R>
void gemm_rows(const double* x, const double* b, const double* bias, double* y, std::size_t k,
               std::size_t n) {
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) gemm_block8<R>(x, b, bias, y, k, n, j);
  for (; j < n; ++j) {
    for (int r = 0; r < R; ++r) {
      double acc = bias ? bias[j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += x[r * k + p] * b[p * n + j];
      y[r * n + j] = acc;
    }
  }
}

void gemm_avx2(const double* x, const double* b, const double* bias, double* y, std::size_t m,
               std::size_t k, std::size_t n) {
  std::size_t r = 0;
  for (; r + 4 <= m; r += 4) gemm_rows<4>(x + r * k, b, bias, y + r * n, k, n);
  for (; r < m; ++r) gemm_rows<1>(x + r * k, b, bias, y + r * n, k, n);
}

// exp(x) - 1 for x <= 0. Range reduction x = n ln2 + r with |r| <= ln2 / 2,
// then a degree-12 Taylor polynomial (truncation error below 3e-16).
__m256d expm1_nonpositive(__m256d x) {
  const __m256d lo = _mm256_set1_pd(-700.0);
  x = _mm256_max_pd(x, lo);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93147180369123816490e-01), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.90821492927058770002e-10), r);
  static constexpr double kInvFact[] = {1.0 / 479001600, 1.0 / 39916800, 1.0 / 3628800, 1.0 / 362880,
                                        1.0 / 40320,     1.0 / 5040,     1.0 / 720,     1.0 / 120,
                                        1.0 / 24,        1.0 / 6,        0.5,           1.0,
                                        1.0};
  __m256d p = _mm256_set1_pd(kInvFact[0]);
  for (int i = 1; i < 13; ++i) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFact[i]));
  // 2^n from the exponent bits; n + 1023 is formed exactly in the low
  // mantissa bits by the 2^52 + 2^51 shift.
  const __m256d shifted = _mm256_add_pd(n, _mm256_set1_pd(6755399441055744.0 + 1023.0));
  const __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_castpd_si256(shifted), 52));
  return _mm256_fmsub_pd(p, scale, _mm256_set1_pd(1.0));
}

void elu_avx2(double* x, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d neg = expm1_nonpositive(_mm256_min_pd(v, zero));
    _mm256_storeu_pd(x + i, _mm256_blendv_pd(neg, v, _mm256_cmp_pd(v, zero, _CMP_GT_OQ)));
  }
  for (; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : std::expm1(x[i]);
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{dot_avx2, axpy_avx2, sum_avx2, gemv_avx2, gemm_avx2, elu_avx2};
  return &table;
}

}  // namespace req::kernels

#else

namespace req::kernels {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace req::kernels

#endif
