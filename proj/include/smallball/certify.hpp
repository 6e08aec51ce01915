#pragma once

#include <cstdint>

#include "smallball/fields.hpp"
#include "smallball/linalg.hpp"

namespace smallball {

enum class Provenance { analytic, sampled_lower_bound };

const char* provenance_name(Provenance p);

struct EstimatedConstant {
  double value = 0.0;
  Provenance provenance = Provenance::analytic;
};

// sup over the ball of ||Phi'(x)||: analytic when the family provides it,
// otherwise the max over `budget` low-discrepancy points refined by a few
// steps of projected pattern ascent. Sampled values are lower bounds.
EstimatedConstant estimate_theta(const VectorFieldSpec& f, int budget,
                                 int refine_steps = 20, std::uint64_t seed = 0);

// Lipschitz constant of Phi': analytic when available, otherwise the max of
// ||Phi'(x)-Phi'(v)||/||x-v|| over sampled pairs with midpoint refinement.
EstimatedConstant estimate_gamma(const VectorFieldSpec& f, int budget,
                                 std::uint64_t seed = 0);

// M = 2 (theta + rho gamma): Lipschitz constant of the payoff gradient.
double compute_M(double theta, double gamma, double rho);

struct SigmaResult {
  double value = 0.0;
  Vec witness;  // minimizing y in the rho-ball
};

// sigma = min over ||y|| <= rho of ||Phi(0) - Phi'(0)^T y||, through the
// dual-norm identity sup_{||u||=1} |<c,u> - <A u, y>| = ||c - A^T y||.
SigmaResult compute_sigma(const VectorFieldSpec& f, double rho);

// Same quantity reached through the payoff gradient at 0 (grad_x J(0,y) =
// Phi(0) - Phi'(0)^T y); asserts agreement with compute_sigma to 1e-10.
// With sample_check, also cross-checks the dual-norm identity at the witness
// against a sampled sup over unit directions (1e-3 band).
double compute_delta(const VectorFieldSpec& f, double radius,
                     bool sample_check = false, std::uint64_t seed = 0);

// min(rho, sigma/(2M)) for M > 0; rho for M = 0 with sigma > 0; 0 when
// sigma = 0 (no admissible radius).
double admissible_radius(double sigma, double M, double rho);

struct ConstantsCertificate {
  std::size_t n = 0;
  double rho = 0.0;
  EstimatedConstant theta;
  EstimatedConstant gamma;
  double M = 0.0;
  double sigma = 0.0;
  double delta = 0.0;
  double r_max = 0.0;
  Vec sigma_witness;
  Budgets budgets;
};

// Runs the full constants pipeline for a field.
ConstantsCertificate certify_field(const VectorFieldSpec& f, const Budgets& budgets,
                                   std::uint64_t seed = 0);

struct PositiveSigmaRadius {
  double r_star = 0.0;
  double sigma_at_r_star = 0.0;
};

// Radius r* <= rho on which sigma is guaranteed >= ||Phi(0)||/2:
// r* = min(rho, ||Phi(0)||/(2 ||Phi'(0)||)), or rho when Phi'(0) = 0.
// Throws GateError when Phi(0) = 0 (the equivalence gate: no small-ball
// radius works for a field vanishing at the center).
PositiveSigmaRadius find_positive_sigma_radius(const VectorFieldSpec& f, double rho);

}  // namespace smallball
