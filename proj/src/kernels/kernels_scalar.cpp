#include "smallball/kernels.hpp"

#include <cmath>

// Reference kernels. The SIMD variants must reproduce these bitwise on
// finite inputs: keep accumulation order (j ascending) and operation
// shapes (separate mul/add, no fma) in sync with them.

namespace smallball::kernels {
namespace {

void affine_map_scalar(std::size_t n, std::size_t k, const double* A,
                       const double* b, const double* X, double* OUT) {
  for (std::size_t j = 0; j < n; ++j) {
    double* out = OUT + j * k;
    for (std::size_t i = 0; i < k; ++i) out[i] = b[j];
    for (std::size_t m = 0; m < n; ++m) {
      const double a = A[j * n + m];
      const double* x = X + m * k;
      for (std::size_t i = 0; i < k; ++i) out[i] = out[i] + a * x[i];
    }
  }
}

void square_scale_add_scalar(std::size_t n, std::size_t k, const double* q,
                             const double* b, const double* X, double* OUT) {
  for (std::size_t j = 0; j < n; ++j) {
    const double* x = X + j * k;
    double* out = OUT + j * k;
    for (std::size_t i = 0; i < k; ++i) out[i] = q[j] * (x[i] * x[i]) + b[j];
  }
}

void vec_minus_batch_scalar(std::size_t n, std::size_t k, const double* v,
                            const double* X, double* OUT) {
  for (std::size_t j = 0; j < n; ++j) {
    const double* x = X + j * k;
    double* out = OUT + j * k;
    for (std::size_t i = 0; i < k; ++i) out[i] = v[j] - x[i];
  }
}

void batch_minus_vec_scalar(std::size_t n, std::size_t k, const double* X,
                            const double* v, double* OUT) {
  for (std::size_t j = 0; j < n; ++j) {
    const double* x = X + j * k;
    double* out = OUT + j * k;
    for (std::size_t i = 0; i < k; ++i) out[i] = x[i] - v[j];
  }
}

void sub_pairwise_scalar(std::size_t n, std::size_t k, const double* X,
                         const double* Y, double* OUT) {
  const std::size_t total = n * k;
  for (std::size_t i = 0; i < total; ++i) OUT[i] = X[i] - Y[i];
}

void dot_with_vec_scalar(std::size_t n, std::size_t k, const double* X,
                         const double* v, double* out) {
  for (std::size_t i = 0; i < k; ++i) out[i] = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double* x = X + j * k;
    for (std::size_t i = 0; i < k; ++i) out[i] = out[i] + x[i] * v[j];
  }
}

void dot_pairwise_scalar(std::size_t n, std::size_t k, const double* X,
                         const double* Y, double* out) {
  for (std::size_t i = 0; i < k; ++i) out[i] = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double* x = X + j * k;
    const double* y = Y + j * k;
    for (std::size_t i = 0; i < k; ++i) out[i] = out[i] + x[i] * y[i];
  }
}

void norms_sq_scalar(std::size_t n, std::size_t k, const double* X, double* out) {
  dot_pairwise_scalar(n, k, X, X, out);
}

// Equal operands (including +-0.0) yield b, the MAXPD convention.
void max_elementwise_scalar(std::size_t k, const double* a, const double* b,
                            double* out) {
  for (std::size_t i = 0; i < k; ++i) out[i] = a[i] > b[i] ? a[i] : b[i];
}

void abs_values_scalar(std::size_t k, const double* a, double* out) {
  for (std::size_t i = 0; i < k; ++i) out[i] = std::fabs(a[i]);
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops = {
      "scalar",
      affine_map_scalar,
      square_scale_add_scalar,
      vec_minus_batch_scalar,
      batch_minus_vec_scalar,
      sub_pairwise_scalar,
      dot_with_vec_scalar,
      dot_pairwise_scalar,
      norms_sq_scalar,
      max_elementwise_scalar,
      abs_values_scalar,
  };
  return ops;
}

}  // namespace smallball::kernels
