#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace smallball::kernels {

// Batch kernels over component-major (SoA) sample buffers: a batch of k
// points in R^n is stored as n contiguous runs of k doubles, component j of
// sample i at X[j*k + i]. With n <= a handful and k in the thousands, the
// SIMD variants vectorize across samples; the per-sample accumulation order
// is identical to the scalar kernels (and FP contraction is disabled
// project-wide), so all variants produce bitwise-equal results on finite
// inputs. NaN/Inf handling is unspecified.
struct Ops {
  const char* name;

  // OUT_i = A x_i + b, A row-major n x n.
  void (*affine_map)(std::size_t n, std::size_t k, const double* A,
                     const double* b, const double* X, double* OUT);
  // OUT_i = q (.) (x_i (.) x_i) + b  (componentwise).
  void (*square_scale_add)(std::size_t n, std::size_t k, const double* q,
                           const double* b, const double* X, double* OUT);
  // OUT_i = v - x_i.
  void (*vec_minus_batch)(std::size_t n, std::size_t k, const double* v,
                          const double* X, double* OUT);
  // OUT_i = x_i - v.
  void (*batch_minus_vec)(std::size_t n, std::size_t k, const double* X,
                          const double* v, double* OUT);
  // OUT_i = x_i - y_i.
  void (*sub_pairwise)(std::size_t n, std::size_t k, const double* X,
                       const double* Y, double* OUT);
  // out[i] = <x_i, v>.
  void (*dot_with_vec)(std::size_t n, std::size_t k, const double* X,
                       const double* v, double* out);
  // out[i] = <x_i, y_i>.
  void (*dot_pairwise)(std::size_t n, std::size_t k, const double* X,
                       const double* Y, double* out);
  // out[i] = ||x_i||^2.
  void (*norms_sq)(std::size_t n, std::size_t k, const double* X, double* out);
  // out[i] = max(a[i], b[i]).
  void (*max_elementwise)(std::size_t k, const double* a, const double* b,
                          double* out);
  // out[i] = |a[i]| (in place allowed).
  void (*abs_values)(std::size_t k, const double* a, double* out);
};

const Ops& scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();
bool avx2_supported();
#endif
#if defined(__aarch64__)
const Ops& neon_ops();
#endif

// Variant selected at startup: best supported ISA, overridable with
// SMALLBALL_VI_KERNELS=scalar|avx2|neon (unavailable requests fall back to
// scalar).
const Ops& active_ops();
std::string active_name();

// First index of the maximum of a[0..k), scanning in index order.
// Deterministic tie-break: smallest index wins.
std::size_t argmax(std::size_t k, const double* a, double* max_out);

// Owning SoA buffer for a batch of k points in R^n.
class Batch {
 public:
  Batch(std::size_t n, std::size_t k) : n_(n), k_(k), data_(n * k, 0.0) {}
  std::size_t n() const { return n_; }
  std::size_t k() const { return k_; }
  double* comp(std::size_t j) { return data_.data() + j * k_; }
  const double* comp(std::size_t j) const { return data_.data() + j * k_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void set_point(std::size_t i, const std::vector<double>& x) {
    for (std::size_t j = 0; j < n_; ++j) data_[j * k_ + i] = x[j];
  }
  std::vector<double> point(std::size_t i) const {
    std::vector<double> x(n_);
    for (std::size_t j = 0; j < n_; ++j) x[j] = data_[j * k_ + i];
    return x;
  }

 private:
  std::size_t n_, k_;
  std::vector<double> data_;
};

}  // namespace smallball::kernels
