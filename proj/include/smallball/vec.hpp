#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace smallball {

// Dense vector in R^n. Entries are expected to stay finite; boundary code
// (parsers, field constructors) validates, inner loops do not.
using Vec = std::vector<double>;

// Dense square matrix, row-major.
class Mat {
 public:
  Mat() = default;
  explicit Mat(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}

  static Mat identity(std::size_t n) {
    Mat m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t n() const { return n_; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  const double* data() const { return a_.data(); }
  double* data() { return a_.data(); }

  bool operator==(const Mat& other) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

inline double dot(const Vec& a, const Vec& b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm_sq(a)); }

inline Vec operator+(const Vec& a, const Vec& b) {
  assert(a.size() == b.size());
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec operator-(const Vec& a, const Vec& b) {
  assert(a.size() == b.size());
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec operator*(double c, const Vec& a) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

inline Vec operator-(const Vec& a) { return -1.0 * a; }

// a += c * b
inline void axpy(double c, const Vec& b, Vec& a) {
  assert(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += c * b[i];
}

inline double distance(const Vec& a, const Vec& b) { return norm(a - b); }

inline Vec matvec(const Mat& A, const Vec& x) {
  const std::size_t n = A.n();
  assert(x.size() == n);
  Vec r(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += A(i, j) * x[j];
    r[i] = s;
  }
  return r;
}

// A^T x (the adjoint of A in R^n).
inline Vec tmatvec(const Mat& A, const Vec& x) {
  const std::size_t n = A.n();
  assert(x.size() == n);
  Vec r(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += A(i, j) * x[i];
    r[j] = s;
  }
  return r;
}

inline Mat transpose(const Mat& A) {
  Mat r(A.n());
  for (std::size_t i = 0; i < A.n(); ++i)
    for (std::size_t j = 0; j < A.n(); ++j) r(j, i) = A(i, j);
  return r;
}

inline Mat operator-(const Mat& A, const Mat& B) {
  assert(A.n() == B.n());
  Mat r(A.n());
  for (std::size_t i = 0; i < A.n(); ++i)
    for (std::size_t j = 0; j < A.n(); ++j) r(i, j) = A(i, j) - B(i, j);
  return r;
}

inline double frobenius_norm(const Mat& A) {
  double s = 0.0;
  const std::size_t nn = A.n() * A.n();
  for (std::size_t i = 0; i < nn; ++i) s += A.data()[i] * A.data()[i];
  return std::sqrt(s);
}

inline bool all_finite(const Vec& a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

inline bool all_finite(const Mat& A) {
  const std::size_t nn = A.n() * A.n();
  for (std::size_t i = 0; i < nn; ++i)
    if (!std::isfinite(A.data()[i])) return false;
  return true;
}

// Euclidean projection onto the closed ball of radius r around the origin.
inline Vec project_ball(const Vec& x, double r) {
  assert(r > 0.0);
  const double nx = norm(x);
  if (nx <= r) return x;
  return (r / nx) * x;
}

}  // namespace smallball
