#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smallball/certify.hpp"
#include "smallball/fields.hpp"

namespace smallball {

// Payoff J(x, y) = <Phi(x), x - y>.
double payoff_value(const VectorFieldSpec& f, const Vec& x, const Vec& y);

// Gradient of the payoff in x: Phi(x) + Phi'(x)^T (x - y).
Vec payoff_grad_x(const VectorFieldSpec& f, const Vec& x, const Vec& y);

// Threshold below which ||Phi(x)|| counts as vanishing.
double vanish_tol(const VectorFieldSpec& f);

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 10000;
  double damping_t0 = 1.0;
  double damping_floor = 1.0 / 64.0;
  std::uint64_t seed = 0;
};

struct ResidualBundle {
  double fixed_point = 0.0;  // ||x* + r Phi(x*)/||Phi(x*)||||
  double sphere = 0.0;       // | ||x*|| - r |
  double stampacchia = 0.0;  // <Phi(x*), x*> + r ||Phi(x*)||
  double saddle_gap = 0.0;   // |J(x*, y*)|
  double xy_gap = 0.0;       // ||x* - y*||
};

struct TraceEntry {
  int iteration = 0;
  double residual = 0.0;
  double step = 0.0;
};

struct SolutionCertificate {
  std::string solver;
  Vec x_star;
  Vec y_star;
  double r = 0.0;
  int iterations = 0;
  bool converged = false;
  ResidualBundle residuals;
  std::vector<TraceEntry> trace;
  std::string diagnostic;
  std::uint64_t seed = 0;
};

// Unique maximizer of -<Phi(x), y> over the r-ball: -r Phi(x)/||Phi(x)||.
// Throws NumericalError when the field vanishes at x.
Vec best_response_y(const VectorFieldSpec& f, const Vec& x, double r);

struct MinimizeResult {
  Vec x;
  bool converged = false;
  int iterations = 0;
  double pg_residual = 0.0;
};

// Minimizer of J(., y) over the r-ball via projected gradient on the
// convex surrogate g(x) = (L/2)||x||^2 + J(x, y) with fixed step 1/(2L).
// The minimizer is unique and sits on the r-sphere for admissible r.
// L = 0 (constant field) short-circuits to the closed form -r b/||b||.
MinimizeResult minimize_payoff(const VectorFieldSpec& f, const Vec& y, double r,
                               double L, double tol = 1e-12,
                               int max_iter = 200000);

// Damped normalized fixed-point iteration on F(x) = -r Phi(x)/||Phi(x)||,
// started from F(0). Damping halves on residual increase (floor 1/64).
SolutionCertificate fixed_point_solve(const VectorFieldSpec& f, double r,
                                      const SolveOptions& opts = {});

// Same iteration from a caller-supplied start (multistart probes).
SolutionCertificate fixed_point_solve_from(const VectorFieldSpec& f, double r,
                                           const Vec& x0,
                                           const SolveOptions& opts = {});

// Alternating exact best responses: x <- argmin_x J(x, y) (via
// minimize_payoff), y <- -r Phi(x)/||Phi(x)||. Detects two-cycles.
SolutionCertificate saddle_solve(const VectorFieldSpec& f, double r, double L,
                                 const SolveOptions& opts = {});

// Shifted-field constructor: requires Psi'(0) = 0 and ||d|| = 1; computes
// M1 from Psi's certificate and returns Phi = Psi - w with
// w = Psi(0) + 2 M1 rho d, the equality case of the shift bound. The
// resulting field certifies r_max = rho.
VectorFieldSpec shifted_field_construct(const VectorFieldSpec& psi, double rho,
                                        const Vec& d);

// Saddle problem with the admissibility invariant enforced at construction:
// 0 < r <= min(rho, sigma/(2M)) unless override_radius.
struct SaddleProblem {
  const VectorFieldSpec* field = nullptr;
  double r = 0.0;
  double L = 0.0;
};
SaddleProblem make_saddle_problem(const VectorFieldSpec& f,
                                  const ConstantsCertificate& cert, double r,
                                  bool override_radius = false);

}  // namespace smallball
