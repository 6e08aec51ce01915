#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "smallball/kernels.hpp"

// AVX2 variants, vectorized across samples (4 doubles per lane group).
// Accumulation order per sample matches the scalar kernels exactly, and no
// FMA is emitted, so results are bitwise equal to the scalar reference.

namespace smallball::kernels {
namespace {

void affine_map_avx2(std::size_t n, std::size_t k, const double* A,
                     const double* b, const double* X, double* OUT) {
  for (std::size_t j = 0; j < n; ++j) {
    double* out = OUT + j * k;
    const __m256d bj = _mm256_set1_pd(b[j]);
    std::size_t i = 0;
    for (; i + 4 <= k; i += 4) _mm256_storeu_pd(out + i, bj);
    for (; i < k; ++i) out[i] = b[j];
    for (std::size_t m = 0; m < n; ++m) {
      const double a = A[j * n + m];
      const __m256d va = _mm256_set1_pd(a);
      const double* x = X + m * k;
      i = 0;
      for (; i + 4 <= k; i += 4) {
        __m256d acc = _mm256_loadu_pd(out + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(out + i, acc);
      }
      for (; i < k; ++i) out[i] = out[i] + a * x[i];
    }
  }
}

void square_scale_add_avx2(std::size_t n, std::size_t k, const double* q,
                           const double* b, const double* X, double* OUT) {
  for (std::size_t j = 0; j < n; ++j) {
    const double* x = X + j * k;
    double* out = OUT + j * k;
    const __m256d vq = _mm256_set1_pd(q[j]);
    const __m256d vb = _mm256_set1_pd(b[j]);
    std::size_t i = 0;
    for (; i + 4 <= k; i += 4) {
      const __m256d vx = _mm256_loadu_pd(x + i);
      const __m256d sq = _mm256_mul_pd(vx, vx);
      _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_mul_pd(vq, sq), vb));
    }
    for (; i < k; ++i) out[i] = q[j] * (x[i] * x[i]) + b[j];
  }
}

void vec_minus_batch_avx2(std::size_t n, std::size_t k, const double* v,
                          const double* X, double* OUT) {
  for (std::size_t j = 0; j < n; ++j) {
    const double* x = X + j * k;
    double* out = OUT + j * k;
    const __m256d vj = _mm256_set1_pd(v[j]);
    std::size_t i = 0;
    for (; i + 4 <= k; i += 4)
      _mm256_storeu_pd(out + i, _mm256_sub_pd(vj, _mm256_loadu_pd(x + i)));
    for (; i < k; ++i) out[i] = v[j] - x[i];
  }
}

void batch_minus_vec_avx2(std::size_t n, std::size_t k, const double* X,
                          const double* v, double* OUT) {
  for (std::size_t j = 0; j < n; ++j) {
    const double* x = X + j * k;
    double* out = OUT + j * k;
    const __m256d vj = _mm256_set1_pd(v[j]);
    std::size_t i = 0;
    for (; i + 4 <= k; i += 4)
      _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(x + i), vj));
    for (; i < k; ++i) out[i] = x[i] - v[j];
  }
}

void sub_pairwise_avx2(std::size_t n, std::size_t k, const double* X,
                       const double* Y, double* OUT) {
  const std::size_t total = n * k;
  std::size_t i = 0;
  for (; i + 4 <= total; i += 4)
    _mm256_storeu_pd(OUT + i,
                     _mm256_sub_pd(_mm256_loadu_pd(X + i), _mm256_loadu_pd(Y + i)));
  for (; i < total; ++i) OUT[i] = X[i] - Y[i];
}

void dot_with_vec_avx2(std::size_t n, std::size_t k, const double* X,
                       const double* v, double* out) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= k; i += 4) _mm256_storeu_pd(out + i, zero);
  for (; i < k; ++i) out[i] = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double* x = X + j * k;
    const __m256d vj = _mm256_set1_pd(v[j]);
    i = 0;
    for (; i + 4 <= k; i += 4) {
      __m256d acc = _mm256_loadu_pd(out + i);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), vj));
      _mm256_storeu_pd(out + i, acc);
    }
    for (; i < k; ++i) out[i] = out[i] + x[i] * v[j];
  }
}

void dot_pairwise_avx2(std::size_t n, std::size_t k, const double* X,
                       const double* Y, double* out) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= k; i += 4) _mm256_storeu_pd(out + i, zero);
  for (; i < k; ++i) out[i] = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double* x = X + j * k;
    const double* y = Y + j * k;
    i = 0;
    for (; i + 4 <= k; i += 4) {
      __m256d acc = _mm256_loadu_pd(out + i);
      acc = _mm256_add_pd(
          acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
      _mm256_storeu_pd(out + i, acc);
    }
    for (; i < k; ++i) out[i] = out[i] + x[i] * y[i];
  }
}

void norms_sq_avx2(std::size_t n, std::size_t k, const double* X, double* out) {
  dot_pairwise_avx2(n, k, X, X, out);
}

void max_elementwise_avx2(std::size_t k, const double* a, const double* b,
                          double* out) {
  std::size_t i = 0;
  for (; i + 4 <= k; i += 4)
    _mm256_storeu_pd(out + i,
                     _mm256_max_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < k; ++i) out[i] = a[i] > b[i] ? a[i] : b[i];
}

void abs_values_avx2(std::size_t k, const double* a, double* out) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 4 <= k; i += 4)
    _mm256_storeu_pd(out + i, _mm256_andnot_pd(sign, _mm256_loadu_pd(a + i)));
  for (; i < k; ++i) out[i] = __builtin_fabs(a[i]);
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops ops = {
      "avx2",
      affine_map_avx2,
      square_scale_add_avx2,
      vec_minus_batch_avx2,
      batch_minus_vec_avx2,
      sub_pairwise_avx2,
      dot_with_vec_avx2,
      dot_pairwise_avx2,
      norms_sq_avx2,
      max_elementwise_avx2,
      abs_values_avx2,
  };
  return ops;
}

bool avx2_supported() {
#if defined(__GNUC__) || defined(__clang__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

}  // namespace smallball::kernels

#endif  // x86_64
