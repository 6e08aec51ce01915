#include "smallball/solve.hpp"

#include <cmath>

#include "smallball/errors.hpp"

namespace smallball {

double payoff_value(const VectorFieldSpec& f, const Vec& x, const Vec& y) {
  return dot(f(x), x - y);
}

Vec payoff_grad_x(const VectorFieldSpec& f, const Vec& x, const Vec& y) {
  Vec g = f(x);
  const Vec t = tmatvec(f.jac(x), x - y);
  axpy(1.0, t, g);
  return g;
}

double vanish_tol(const VectorFieldSpec& f) {
  return 1e-12 * (1.0 + norm(f(Vec(f.dim, 0.0))));
}

Vec best_response_y(const VectorFieldSpec& f, const Vec& x, double r) {
  const Vec phi = f(x);
  const double np = norm(phi);
  if (np < vanish_tol(f))
    throw NumericalError("best_response_y: field vanishes at the query point");
  return (-r / np) * phi;
}

MinimizeResult minimize_payoff(const VectorFieldSpec& f, const Vec& y, double r,
                               double L, double tol, int max_iter) {
  MinimizeResult res;
  const std::size_t n = f.dim;

  if (L <= 0.0) {
    // constant field: J(x, y) = <b, x - y>, minimized over the ball at
    // -r b/||b||
    const Vec b = f(Vec(n, 0.0));
    const double nb = norm(b);
    if (nb < vanish_tol(f))
      throw NumericalError("minimize_payoff: L = 0 with vanishing field");
    res.x = (-r / nb) * b;
    res.converged = true;
    return res;
  }

  const double step = 1.0 / (2.0 * L);

  // start on the sphere against the payoff gradient at 0
  Vec g0 = payoff_grad_x(f, Vec(n, 0.0), y);
  Vec x(n, 0.0);
  const double ng0 = norm(g0);
  if (ng0 > 1e-300) {
    x = (-r / ng0) * g0;
  } else {
    x[0] = r;
  }

  for (int it = 0; it < max_iter; ++it) {
    Vec g = payoff_grad_x(f, x, y);
    axpy(L, x, g);  // gradient of the convex surrogate
    const Vec xn = project_ball(x - step * g, r);
    const double move = distance(x, xn);
    x = xn;
    res.iterations = it + 1;
    res.pg_residual = move;
    if (move <= tol) {
      res.converged = true;
      break;
    }
  }
  res.x = x;
  return res;
}

namespace {

SolutionCertificate finish_certificate(const VectorFieldSpec& f, std::string solver,
                                       Vec x, double r, int iterations,
                                       bool converged, std::vector<TraceEntry> trace,
                                       std::string diagnostic, std::uint64_t seed) {
  SolutionCertificate cert;
  cert.solver = std::move(solver);
  cert.r = r;
  cert.iterations = iterations;
  cert.converged = converged;
  cert.trace = std::move(trace);
  cert.diagnostic = std::move(diagnostic);
  cert.seed = seed;

  const Vec phi = f(x);
  const double np = norm(phi);
  Vec y = x;
  if (np >= vanish_tol(f)) y = (-r / np) * phi;

  cert.x_star = x;
  cert.y_star = y;
  cert.residuals.fixed_point = distance(x, y);
  cert.residuals.sphere = std::fabs(norm(x) - r);
  cert.residuals.stampacchia = dot(phi, x) + r * np;
  cert.residuals.saddle_gap = std::fabs(dot(phi, x - y));
  cert.residuals.xy_gap = distance(x, y);
  return cert;
}

}  // namespace

SolutionCertificate fixed_point_solve_from(const VectorFieldSpec& f, double r,
                                           const Vec& x0, const SolveOptions& opts) {
  const double vtol = vanish_tol(f);
  std::vector<TraceEntry> trace;
  trace.reserve(64);

  Vec x = x0;
  double t = opts.damping_t0;
  double res_prev = HUGE_VAL;
  bool converged = false;
  int it = 0;
  std::string diagnostic;

  for (it = 1; it <= opts.max_iter; ++it) {
    const Vec phi = f(x);
    const double np = norm(phi);
    if (np < vtol) {
      diagnostic = "field vanishes along the iteration path";
      break;
    }
    const Vec Fx = (-r / np) * phi;
    const double res = distance(x, Fx);
    trace.push_back({it, res, t});
    if (res <= opts.tol) {
      converged = true;
      break;
    }
    if (res > res_prev && t > opts.damping_floor)
      t = std::max(0.5 * t, opts.damping_floor);
    res_prev = res;

    Vec mix = (1.0 - t) * x;
    axpy(t, Fx, mix);
    double nm = norm(mix);
    while (nm < 1e-300 && t > opts.damping_floor) {
      t = std::max(0.5 * t, opts.damping_floor);
      mix = (1.0 - t) * x;
      axpy(t, Fx, mix);
      nm = norm(mix);
    }
    if (nm < 1e-300) {
      diagnostic = "degenerate damped step";
      break;
    }
    x = (r / nm) * mix;
  }
  if (!converged && diagnostic.empty()) diagnostic = "max_iter reached";
  if (diagnostic == "field vanishes along the iteration path")
    throw NumericalError("fixed_point_solve: " + diagnostic);

  return finish_certificate(f, "fixed-point", x, r, std::min(it, opts.max_iter),
                            converged, std::move(trace),
                            converged ? "" : diagnostic, opts.seed);
}

SolutionCertificate fixed_point_solve(const VectorFieldSpec& f, double r,
                                      const SolveOptions& opts) {
  const Vec phi0 = f(Vec(f.dim, 0.0));
  const double np = norm(phi0);
  if (np < vanish_tol(f))
    throw GateError("fixed_point_solve: Phi(0) = 0");
  const Vec x0 = (-r / np) * phi0;
  return fixed_point_solve_from(f, r, x0, opts);
}

SolutionCertificate saddle_solve(const VectorFieldSpec& f, double r, double L,
                                 const SolveOptions& opts) {
  const Vec phi0 = f(Vec(f.dim, 0.0));
  const double np0 = norm(phi0);
  if (np0 < vanish_tol(f))
    throw GateError("saddle_solve: Phi(0) = 0");

  const double inner_tol = std::min(1e-12, 0.01 * opts.tol);
  Vec y = (-r / np0) * phi0;
  Vec x_prev, x_prev2;
  std::vector<TraceEntry> trace;
  bool converged = false;
  std::string diagnostic;
  Vec x;
  int it = 0;

  const int outer_max = std::min(opts.max_iter, 500);
  for (it = 1; it <= outer_max; ++it) {
    const MinimizeResult mres = minimize_payoff(f, y, r, L, inner_tol);
    x = mres.x;
    if (!mres.converged) {
      diagnostic = "inner minimization hit max_iter";
      trace.push_back({it, mres.pg_residual, 0.0});
      break;
    }
    const Vec ynew = best_response_y(f, x, r);
    const double xy = distance(x, ynew);
    trace.push_back({it, xy, 0.0});
    if (xy <= opts.tol) {
      y = ynew;
      converged = true;
      break;
    }
    if (it >= 3 && distance(x, x_prev2) <= 1e-14 * r &&
        distance(x, x_prev) > 10.0 * opts.tol) {
      diagnostic = "oscillation: two-cycle in the best-response trace";
      y = ynew;
      break;
    }
    x_prev2 = x_prev;
    x_prev = x;
    y = ynew;
  }
  if (!converged && diagnostic.empty()) diagnostic = "max_iter reached";

  SolutionCertificate cert =
      finish_certificate(f, "saddle", x, r, std::min(it, outer_max), converged,
                         std::move(trace), converged ? "" : diagnostic, opts.seed);
  return cert;
}

VectorFieldSpec shifted_field_construct(const VectorFieldSpec& psi, double rho,
                                        const Vec& d) {
  if (d.size() != psi.dim)
    throw Error("shifted_field_construct: direction dimension mismatch");
  if (std::fabs(norm(d) - 1.0) > 1e-8)
    throw Error("shifted_field_construct: direction must be a unit vector");
  if (rho > psi.rho)
    throw Error("shifted_field_construct: rho exceeds the base field domain");

  const Vec zero(psi.dim, 0.0);
  const double j0 = operator_norm(psi.jac(zero));
  if (j0 > 1e-10)
    throw GateError(
        "shifted_field_construct: the base field's derivative must vanish at 0");

  const EstimatedConstant theta1 = estimate_theta(psi, 1000);
  const EstimatedConstant gamma1 = estimate_gamma(psi, 1000);
  const double M1 = compute_M(theta1.value, gamma1.value, rho);

  Vec w = psi(zero);
  axpy(2.0 * M1 * rho, d, w);
  VectorFieldSpec out = make_shifted_field(psi, w);
  out.rho = rho;
  return out;
}

SaddleProblem make_saddle_problem(const VectorFieldSpec& f,
                                  const ConstantsCertificate& cert, double r,
                                  bool override_radius) {
  if (!(r > 0.0) || r > f.rho * (1.0 + 1e-12))
    throw Error("saddle problem: radius must lie in (0, rho]");
  if (!override_radius && r > cert.r_max * (1.0 + 1e-12))
    throw GateError("saddle problem: radius above the admissible bound r_max");
  SaddleProblem p;
  p.field = &f;
  p.r = r;
  p.L = cert.M;
  return p;
}

}  // namespace smallball
