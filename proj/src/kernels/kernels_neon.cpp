#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

#include "smallball/kernels.hpp"

// NEON variants (2 doubles per lane group). Same bitwise-equality contract
// as the AVX2 file: scalar accumulation order, no fused multiply-add, and
// max implemented as greater-than select so equal operands yield b.

namespace smallball::kernels {
namespace {

inline float64x2_t sel_max(float64x2_t a, float64x2_t b) {
  return vbslq_f64(vcgtq_f64(a, b), a, b);
}

void affine_map_neon(std::size_t n, std::size_t k, const double* A,
                     const double* b, const double* X, double* OUT) {
  for (std::size_t j = 0; j < n; ++j) {
    double* out = OUT + j * k;
    const float64x2_t bj = vdupq_n_f64(b[j]);
    std::size_t i = 0;
    for (; i + 2 <= k; i += 2) vst1q_f64(out + i, bj);
    for (; i < k; ++i) out[i] = b[j];
    for (std::size_t m = 0; m < n; ++m) {
      const double a = A[j * n + m];
      const float64x2_t va = vdupq_n_f64(a);
      const double* x = X + m * k;
      i = 0;
      for (; i + 2 <= k; i += 2) {
        float64x2_t acc = vld1q_f64(out + i);
        acc = vaddq_f64(acc, vmulq_f64(va, vld1q_f64(x + i)));
        vst1q_f64(out + i, acc);
      }
      for (; i < k; ++i) out[i] = out[i] + a * x[i];
    }
  }
}

void square_scale_add_neon(std::size_t n, std::size_t k, const double* q,
                           const double* b, const double* X, double* OUT) {
  for (std::size_t j = 0; j < n; ++j) {
    const double* x = X + j * k;
    double* out = OUT + j * k;
    const float64x2_t vq = vdupq_n_f64(q[j]);
    const float64x2_t vb = vdupq_n_f64(b[j]);
    std::size_t i = 0;
    for (; i + 2 <= k; i += 2) {
      const float64x2_t vx = vld1q_f64(x + i);
      vst1q_f64(out + i, vaddq_f64(vmulq_f64(vq, vmulq_f64(vx, vx)), vb));
    }
    for (; i < k; ++i) out[i] = q[j] * (x[i] * x[i]) + b[j];
  }
}

void vec_minus_batch_neon(std::size_t n, std::size_t k, const double* v,
                          const double* X, double* OUT) {
  for (std::size_t j = 0; j < n; ++j) {
    const double* x = X + j * k;
    double* out = OUT + j * k;
    const float64x2_t vj = vdupq_n_f64(v[j]);
    std::size_t i = 0;
    for (; i + 2 <= k; i += 2) vst1q_f64(out + i, vsubq_f64(vj, vld1q_f64(x + i)));
    for (; i < k; ++i) out[i] = v[j] - x[i];
  }
}

void batch_minus_vec_neon(std::size_t n, std::size_t k, const double* X,
                          const double* v, double* OUT) {
  for (std::size_t j = 0; j < n; ++j) {
    const double* x = X + j * k;
    double* out = OUT + j * k;
    const float64x2_t vj = vdupq_n_f64(v[j]);
    std::size_t i = 0;
    for (; i + 2 <= k; i += 2) vst1q_f64(out + i, vsubq_f64(vld1q_f64(x + i), vj));
    for (; i < k; ++i) out[i] = x[i] - v[j];
  }
}

void sub_pairwise_neon(std::size_t n, std::size_t k, const double* X,
                       const double* Y, double* OUT) {
  const std::size_t total = n * k;
  std::size_t i = 0;
  for (; i + 2 <= total; i += 2)
    vst1q_f64(OUT + i, vsubq_f64(vld1q_f64(X + i), vld1q_f64(Y + i)));
  for (; i < total; ++i) OUT[i] = X[i] - Y[i];
}

void dot_with_vec_neon(std::size_t n, std::size_t k, const double* X,
                       const double* v, double* out) {
  for (std::size_t i = 0; i < k; ++i) out[i] = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double* x = X + j * k;
    const float64x2_t vj = vdupq_n_f64(v[j]);
    std::size_t i = 0;
    for (; i + 2 <= k; i += 2) {
      float64x2_t acc = vld1q_f64(out + i);
      acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(x + i), vj));
      vst1q_f64(out + i, acc);
    }
    for (; i < k; ++i) out[i] = out[i] + x[i] * v[j];
  }
}

void dot_pairwise_neon(std::size_t n, std::size_t k, const double* X,
                       const double* Y, double* out) {
  for (std::size_t i = 0; i < k; ++i) out[i] = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double* x = X + j * k;
    const double* y = Y + j * k;
    std::size_t i = 0;
    for (; i + 2 <= k; i += 2) {
      float64x2_t acc = vld1q_f64(out + i);
      acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
      vst1q_f64(out + i, acc);
    }
    for (; i < k; ++i) out[i] = out[i] + x[i] * y[i];
  }
}

void norms_sq_neon(std::size_t n, std::size_t k, const double* X, double* out) {
  dot_pairwise_neon(n, k, X, X, out);
}

void max_elementwise_neon(std::size_t k, const double* a, const double* b,
                          double* out) {
  std::size_t i = 0;
  for (; i + 2 <= k; i += 2)
    vst1q_f64(out + i, sel_max(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < k; ++i) out[i] = a[i] > b[i] ? a[i] : b[i];
}

void abs_values_neon(std::size_t k, const double* a, double* out) {
  std::size_t i = 0;
  for (; i + 2 <= k; i += 2) vst1q_f64(out + i, vabsq_f64(vld1q_f64(a + i)));
  for (; i < k; ++i) out[i] = std::fabs(a[i]);
}

}  // namespace

const Ops& neon_ops() {
  static const Ops ops = {
      "neon",
      affine_map_neon,
      square_scale_add_neon,
      vec_minus_batch_neon,
      batch_minus_vec_neon,
      sub_pairwise_neon,
      dot_with_vec_neon,
      dot_pairwise_neon,
      norms_sq_neon,
      max_elementwise_neon,
      abs_values_neon,
  };
  return ops;
}

}  // namespace smallball::kernels

#endif  // __aarch64__
