#include "req/diffcore/kernels.hpp"

#include <cmath>

namespace req::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

void gemv_scalar(const double* w, const double* bias, const double* x, double* out,
                 std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    out[r] = bias[r] + dot_scalar(w + r * cols, x, cols);
  }
}

void gemm_scalar(const double* x, const double* b, const double* bias, double* y, std::size_t m,
                 std::size_t k, std::size_t n) {
  for (std::size_t r = 0; r < m; ++r) {
    double* yr = y + r * n;
    for (std::size_t j = 0; j < n; ++j) yr[j] = bias ? bias[j] : 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double xv = x[r * k + p];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) yr[j] += xv * bp[j];
    }
  }
}

void elu_scalar(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : std::expm1(x[i]);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{dot_scalar, axpy_scalar, sum_scalar, gemv_scalar, gemm_scalar, elu_scalar};
  return table;
}

}  // namespace req::kernels
