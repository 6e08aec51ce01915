#include "smallball/certify.hpp"

#include <cmath>

#include "smallball/errors.hpp"
#include "smallball/kernels.hpp"
#include "smallball/sampling.hpp"

namespace smallball {

const char* provenance_name(Provenance p) {
  return p == Provenance::analytic ? "analytic" : "sampled-lower-bound";
}

EstimatedConstant estimate_theta(const VectorFieldSpec& f, int budget,
                                 int refine_steps, std::uint64_t seed) {
  if (f.analytic) return {f.analytic->theta, Provenance::analytic};
  if (budget < 1) throw Error("estimate_theta: budget must be >= 1");

  const std::size_t n = f.dim;
  const std::uint64_t off = halton_offset(seed);

  Vec best_x(n, 0.0);
  double best = operator_norm(f.jac(best_x));
  for (int i = 0; i < budget; ++i) {
    const Vec x = halton_ball_point(off + static_cast<std::uint64_t>(i), n, f.rho);
    const double v = operator_norm(f.jac(x));
    if (v > best) {
      best = v;
      best_x = x;
    }
  }

  // projected pattern ascent on x -> ||Phi'(x)||; candidate moves are
  // projected back into the ball so the field is never probed outside it
  double step = 0.1 * f.rho;
  for (int s = 0; s < refine_steps; ++s) {
    bool improved = false;
    for (std::size_t j = 0; j < n; ++j) {
      for (const double sign : {1.0, -1.0}) {
        Vec cand = best_x;
        cand[j] += sign * step;
        cand = project_ball(cand, f.rho);
        const double v = operator_norm(f.jac(cand));
        if (v > best) {
          best = v;
          best_x = cand;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return {best, Provenance::sampled_lower_bound};
}

EstimatedConstant estimate_gamma(const VectorFieldSpec& f, int budget,
                                 std::uint64_t seed) {
  if (f.analytic) return {f.analytic->gamma, Provenance::analytic};
  if (budget < 1) throw Error("estimate_gamma: budget must be >= 1");

  const std::size_t n = f.dim;
  const std::uint64_t off = halton_offset(seed ^ 0x6a09e667f3bcc909ULL);
  const double dist_floor = 1e-6 * f.rho;

  auto ratio = [&](const Vec& x, const Vec& v) {
    const double d = distance(x, v);
    if (d < dist_floor) return -1.0;
    return operator_norm(f.jac(x) - f.jac(v)) / d;
  };

  double best = 0.0;
  Vec bx(n, 0.0), bv(n, 0.0);
  bool have = false;
  for (int i = 0; i < budget; ++i) {
    const Vec x = halton_ball_point(off + 2 * static_cast<std::uint64_t>(i), n, f.rho);
    const Vec v = halton_ball_point(off + 2 * static_cast<std::uint64_t>(i) + 1, n, f.rho);
    const double rv = ratio(x, v);
    if (rv > best || !have) {
      best = std::max(rv, 0.0);
      bx = x;
      bv = v;
      have = true;
    }
  }

  // midpoint refinement: shrink the pair toward the local curvature maximum
  for (int round = 0; round < 30; ++round) {
    if (distance(bx, bv) <= 2.0 * dist_floor) break;
    const Vec m = 0.5 * (bx + bv);
    const double r1 = ratio(bx, m);
    const double r2 = ratio(m, bv);
    if (r1 >= r2 && r1 > best) {
      bv = m;
      best = r1;
    } else if (r2 > best) {
      bx = m;
      best = r2;
    } else {
      // small projected perturbations of one endpoint
      bool improved = false;
      const double step = 0.5 * distance(bx, bv);
      for (std::size_t j = 0; j < n && !improved; ++j) {
        for (const double sign : {1.0, -1.0}) {
          Vec cand = bx;
          cand[j] += sign * step;
          cand = project_ball(cand, f.rho);
          const double rv = ratio(cand, bv);
          if (rv > best) {
            best = rv;
            bx = cand;
            improved = true;
            break;
          }
        }
      }
      if (!improved) break;
    }
  }
  return {best, Provenance::sampled_lower_bound};
}

double compute_M(double theta, double gamma, double rho) {
  return 2.0 * (theta + rho * gamma);
}

SigmaResult compute_sigma(const VectorFieldSpec& f, double rho) {
  const Vec c = f(Vec(f.dim, 0.0));
  const Mat A = f.jac(Vec(f.dim, 0.0));
  const BallLsqSolution sol = ball_constrained_lsq(A, c, rho);
  return {sol.objective, sol.y_star};
}

double compute_delta(const VectorFieldSpec& f, double radius, bool sample_check,
                     std::uint64_t seed) {
  const SigmaResult sig = compute_sigma(f, radius);

  // gradient route: grad_x J(0, y) = Phi(0) - Phi'(0)^T y at the witness
  const Vec zero(f.dim, 0.0);
  const Vec c = f(zero);
  const Mat A = f.jac(zero);
  const Vec w = c - tmatvec(A, sig.witness);
  const double delta = norm(w);

  if (std::fabs(delta - sig.value) > 1e-10 * (1.0 + sig.value))
    throw NumericalError("compute_delta: gradient route disagrees with the "
                         "least-squares objective (internal inconsistency)");

  if (sample_check) {
    // sampled sup over unit directions of |<w, u>| must flank ||w||
    const std::size_t n = f.dim;
    const long k = 100000;
    kernels::Batch U(n, static_cast<std::size_t>(k));
    for (long i = 0; i < k; ++i) {
      SampleRng rng(seed, 0xD0A1, static_cast<std::uint64_t>(i));
      U.set_point(static_cast<std::size_t>(i), sphere_sample(rng, n, 1.0));
    }
    std::vector<double> s(k);
    const auto& ops = kernels::active_ops();
    ops.dot_with_vec(n, static_cast<std::size_t>(k), U.data(), w.data(), s.data());
    ops.abs_values(static_cast<std::size_t>(k), s.data(), s.data());
    double smax = 0.0;
    kernels::argmax(static_cast<std::size_t>(k), s.data(), &smax);
    if (smax > delta * (1.0 + 1e-12) + 1e-300 ||
        smax < delta - 1e-3 * (1.0 + delta))
      throw NumericalError("compute_delta: sampled dual-norm sup out of band");
  }
  return delta;
}

double admissible_radius(double sigma, double M, double rho) {
  if (!(sigma > 0.0)) return 0.0;
  if (M > 0.0) return std::min(rho, sigma / (2.0 * M));
  return rho;
}

ConstantsCertificate certify_field(const VectorFieldSpec& f, const Budgets& budgets,
                                   std::uint64_t seed) {
  ConstantsCertificate cert;
  cert.n = f.dim;
  cert.rho = f.rho;
  cert.budgets = budgets;
  cert.theta = estimate_theta(f, budgets.theta_samples, 20, seed);
  cert.gamma = estimate_gamma(f, budgets.gamma_samples, seed);
  cert.M = compute_M(cert.theta.value, cert.gamma.value, f.rho);
  const SigmaResult sig = compute_sigma(f, f.rho);
  cert.sigma = sig.value;
  cert.sigma_witness = sig.witness;
  cert.delta = compute_delta(f, f.rho, false, seed);
  cert.r_max = admissible_radius(cert.sigma, cert.M, f.rho);
  return cert;
}

PositiveSigmaRadius find_positive_sigma_radius(const VectorFieldSpec& f, double rho) {
  const Vec zero(f.dim, 0.0);
  const double phi0 = norm(f(zero));
  if (phi0 <= 1e-30)
    throw GateError("theorem 2.3 gate: Phi(0) = 0, no radius gives sigma > 0");
  const double j0 = operator_norm(f.jac(zero));
  PositiveSigmaRadius out;
  out.r_star = (j0 > 1e-30) ? std::min(rho, phi0 / (2.0 * j0)) : rho;
  out.sigma_at_r_star = compute_sigma(f, out.r_star).value;
  return out;
}

}  // namespace smallball
