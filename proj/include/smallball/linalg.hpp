#pragma once

#include "smallball/vec.hpp"

namespace smallball {

struct OperatorNormResult {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Largest singular value of A, via power iteration on A^T A with
// deterministic restarts when the iteration stalls.
OperatorNormResult operator_norm_full(const Mat& A, double tol = 1e-12,
                                      int max_iter = 20000);

inline double operator_norm(const Mat& A, double tol = 1e-12) {
  return operator_norm_full(A, tol).value;
}

// Eigendecomposition of a symmetric matrix: S = V diag(values) V^T,
// eigenvalues ascending. Cyclic Jacobi rotations.
struct SymEig {
  Vec values;
  Mat vectors;  // column j is the eigenvector for values[j]
};
SymEig jacobi_eigh(const Mat& S, int max_sweeps = 60);

// Minimizer of ||c - A^T y|| over ||y|| <= rho.
//
// Unconstrained normal equations (A A^T) y = A c are solved through the
// eigendecomposition of A A^T; when the minimum-norm solution leaves the
// ball, the boundary multiplier solves (A A^T + lambda I) y = A c with
// ||y(lambda)|| = rho by safeguarded Newton on lambda in [0, ||Ac||/rho].
struct BallLsqSolution {
  Vec y_star;
  double multiplier = 0.0;
  double objective = 0.0;  // ||c - A^T y_star||
  bool on_boundary = false;
  int iterations = 0;
};
BallLsqSolution ball_constrained_lsq(const Mat& A, const Vec& c, double rho,
                                     double tol = 1e-10);

}  // namespace smallball
