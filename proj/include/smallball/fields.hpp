#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "smallball/vec.hpp"

namespace smallball {

// Exact bounds on sup ||Phi'|| and Lip(Phi') when the field family makes
// them available analytically.
struct AnalyticConstants {
  double theta = 0.0;
  double gamma = 0.0;
};

// A C^{1,1} vector field Phi on the closed ball of radius rho in R^n, with
// evaluation and Jacobian access. Evaluators must be pure; the library may
// call them from several threads at once.
struct VectorFieldSpec {
  std::size_t dim = 0;
  double rho = 0.0;
  std::function<Vec(const Vec&)> eval;
  std::function<Mat(const Vec&)> jacobian;
  std::optional<AnalyticConstants> analytic;
  std::string family = "custom";

  // Optional SoA batch evaluator (kernels layout: component j of sample i at
  // X[j*k+i]); absent means a scalar loop over eval.
  std::function<void(std::size_t k, const double* X, double* OUT)> eval_batch;

  Vec operator()(const Vec& x) const {
    assert(norm(x) <= rho * (1.0 + 1e-9));
    return eval(x);
  }
  Mat jac(const Vec& x) const {
    assert(norm(x) <= rho * (1.0 + 1e-9));
    return jacobian(x);
  }
};

// Evaluates the field on a batch, preferring the field's SoA fast path.
void eval_field_batch(const VectorFieldSpec& f, std::size_t k, const double* X,
                      double* OUT);

// Phi(x) = b. theta = gamma = 0.
VectorFieldSpec make_constant_field(Vec b, double rho);

// Phi(x) = A x + b. theta = ||A||, gamma = 0.
VectorFieldSpec make_affine_field(Mat A, Vec b, double rho);

// Phi(x) = A x + b + eps * s(x) with s_j(x) = sin(x_{(j+1) mod n}).
// sup||s'|| = 1 and Lip(s') = 1, so theta <= ||A|| + |eps|, gamma <= |eps|.
VectorFieldSpec make_smooth_perturbed_field(Mat A, Vec b, double eps, double rho);

// Phi_j(x) = coeff_j * x_j^2 + b_j. The derivative vanishes at 0;
// theta = 2 rho max|coeff|, gamma = 2 max|coeff|.
VectorFieldSpec make_quadratic_field(Vec coeff, Vec b, double rho);

// Phi(x) = base(x) - w. Derivative (and analytic constants) unchanged.
VectorFieldSpec make_shifted_field(const VectorFieldSpec& base, const Vec& w);

// Central-difference Jacobian, column j = (Phi(x+h e_j) - Phi(x-h e_j))/2h,
// falling back to one-sided differences when a probe would leave the ball.
Mat finite_diff_jacobian(const VectorFieldSpec& f, const Vec& x, double h);

double default_fd_step(const Vec& x);

enum class Family {
  constant,
  affine,
  affine_plus_smooth,
  gradient_quadratic,
  shifted,
};

const char* family_name(Family f);

struct Budgets {
  int theta_samples = 1000;
  int gamma_samples = 1000;
  int minty_starts = 32;
  long verify_samples = 10000;
};

// Serialized problem description; parse/emit round-trips through JSON.
struct ProblemConfig {
  Family family = Family::constant;
  std::size_t dimension = 0;
  double rho = 0.0;
  std::optional<Mat> A;
  std::optional<Vec> b;
  std::optional<double> eps;
  std::optional<Vec> d;
  Budgets budgets;
  std::uint64_t seed = 0;
};

struct Problem {
  VectorFieldSpec field;
  ProblemConfig config;
};

// Builds the field described by a config. For Family::shifted the base is
// the componentwise quadratic and the shift is w = base(0) + 2 M1 rho d
// with M1 from the base's analytic constants.
Problem build_problem(const ProblemConfig& cfg);

// Strict JSON ingestion: unknown keys, bad families, non-positive rho and
// dimension mismatches are distinct ParseError kinds.
Problem parse_problem(const std::string& text);

// Canonical JSON document; parse(emit(cfg)) reproduces cfg.
std::string emit_problem(const ProblemConfig& cfg);

}  // namespace smallball
