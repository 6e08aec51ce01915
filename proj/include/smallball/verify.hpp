#pragma once

#include <cstdint>
#include <optional>

#include "smallball/fields.hpp"
#include "smallball/solve.hpp"

namespace smallball {

// Exact closed form of sup over the r-ball of <Phi(x), x - y>:
// <Phi(x), x> + r ||Phi(x)||. Non-positive iff x solves the classical VI.
double stampacchia_residual(const VectorFieldSpec& f, const Vec& x, double r);

struct MintySup {
  double estimate = 0.0;  // best value found (a lower bound on the sup)
  int starts = 0;
};

// Estimates sup over the r-ball of h(y) = <Phi(y), x - y> by multistart
// projected-gradient ascent plus batched sampling.
MintySup minty_sup(const VectorFieldSpec& f, const Vec& x, double r, int starts,
                   std::uint64_t seed = 0, long samples = 4096);

struct DoubleViCheck {
  long samples = 0;                 // points actually evaluated
  double worst_margin = 0.0;        // most positive max{...}; negative = pass
  double worst_normalized = 0.0;    // max margin / ||y - x*||
  Vec witness;                      // y attaining worst_margin
};

// Samples max{<Phi(x*), x*-y>, <Phi(y), x*-y>} over the r-ball (interior,
// boundary, and near-x* points; a ball of radius exclusion_eps around x* is
// excluded, since the margin tends to 0 there).
DoubleViCheck double_vi_check(const VectorFieldSpec& f, const Vec& x_star,
                              double r, long samples, std::uint64_t seed = 0,
                              double exclusion_eps = -1.0);

struct SaddleCheck {
  long samples = 0;
  long violations = 0;
  double worst = 0.0;  // largest excess past tol
};

// Counts sampled violations of J(x*, y) <= J(x*, y*) <= J(x, y*).
SaddleCheck saddle_check(const VectorFieldSpec& f, const Vec& x_star,
                         const Vec& y_star, double r, long samples,
                         std::uint64_t seed = 0, double tol = 1e-9);

struct UniquenessProbe {
  int starts = 0;
  int converged = 0;
  int clusters = 0;
  double max_pairwise_distance = 0.0;
};

// Fixed-point solves from `starts` sphere points, clustered at radius 1e-6.
// Non-converged starts are counted, never dropped silently.
UniquenessProbe uniqueness_probe(const VectorFieldSpec& f, double r, int starts,
                                 std::uint64_t seed = 0,
                                 const SolveOptions& opts = {});

struct MonotonicityProbe {
  long samples = 0;
  bool violation_found = false;
  Vec x, y;
  double value = 0.0;  // <Phi(x)-Phi(y), x-y> at the first violating pair
};

// Searches sampled pairs for <Phi(x)-Phi(y), x-y> < -tol.
MonotonicityProbe monotonicity_probe(const VectorFieldSpec& f, double rho,
                                     long samples, std::uint64_t seed = 0,
                                     double tol = 1e-12);

struct VerificationReport {
  DoubleViCheck double_vi;
  double stampacchia_sup = 0.0;
  MintySup minty;
  SaddleCheck saddle;
  UniquenessProbe uniqueness;
  MonotonicityProbe monotonicity;
  bool passed = false;
  double r = 0.0;
  double tol = 0.0;
  std::uint64_t seed = 0;
};

struct VerifyOptions {
  long samples = 10000;
  int minty_starts = 32;
  int uniqueness_starts = 50;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  SolveOptions solve;  // for the uniqueness multistart
};

// Full a-posteriori verification of a solution certificate. passed iff
// worst_margin < 0, minty <= tol, zero saddle violations, one cluster.
VerificationReport verify_solution(const VectorFieldSpec& f,
                                   const SolutionCertificate& sol,
                                   const VerifyOptions& opts);

}  // namespace smallball
