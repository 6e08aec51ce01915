#include "smallball/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "smallball/errors.hpp"
#include "smallball/sampling.hpp"

namespace smallball {
namespace {

Vec power_start(std::size_t n, int attempt) {
  Vec v(n, 0.0);
  if (attempt == 0) {
    // ones plus a mild ramp so the start is not an eigenvector of common
    // structured matrices
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.25 * static_cast<double>(i % 7);
  } else {
    SampleRng rng(0x9e3779b97f4a7c15ULL, 0xA11CE, static_cast<std::uint64_t>(attempt));
    for (std::size_t i = 0; i < n; ++i) v[i] = rng.gauss();
  }
  const double nv = norm(v);
  return (1.0 / nv) * v;
}

}  // namespace

OperatorNormResult operator_norm_full(const Mat& A, double tol, int max_iter) {
  const std::size_t n = A.n();
  OperatorNormResult res;
  if (n == 0) {
    res.converged = true;
    return res;
  }
  if (frobenius_norm(A) == 0.0) {
    res.converged = true;
    return res;
  }

  // Power iteration on A^T A; the iterate's Rayleigh quotient converges to
  // sigma_max^2. Two independent starts guard against a start orthogonal to
  // the top singular subspace; further restarts fire only on stalls.
  const int restarts = 4;
  double best = 0.0;
  int iters_total = 0;
  int converged_attempts = 0;
  for (int attempt = 0; attempt < restarts; ++attempt) {
    Vec v = power_start(n, attempt);
    double lambda_prev = -1.0;
    const int budget = std::max(64, max_iter / restarts);
    for (int it = 0; it < budget; ++it) {
      ++iters_total;
      Vec w = tmatvec(A, matvec(A, v));
      const double lambda = dot(v, w);  // v is unit
      const double nw = norm(w);
      if (nw == 0.0) break;  // v in the null space; restart
      v = (1.0 / nw) * w;
      best = std::max(best, lambda);
      if (lambda_prev >= 0.0 &&
          std::fabs(lambda - lambda_prev) <= tol * std::max(lambda, 1e-300)) {
        ++converged_attempts;
        break;
      }
      lambda_prev = lambda;
    }
    if (converged_attempts >= 2) {
      res.value = std::sqrt(std::max(best, 0.0));
      res.converged = true;
      res.iterations = iters_total;
      return res;
    }
  }
  res.value = std::sqrt(std::max(best, 0.0));
  res.converged = converged_attempts > 0;
  res.iterations = iters_total;
  return res;
}

SymEig jacobi_eigh(const Mat& S, int max_sweeps) {
  const std::size_t n = S.n();
  Mat a = S;
  Mat V = Mat::identity(n);
  const double scale = frobenius_norm(S);
  const double stop = 1e-15 * std::max(scale, 1e-300);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= stop) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) <= 1e-300) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0)
                             ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                             : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a(p, i);
          const double aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = V(i, p);
          const double viq = V(i, q);
          V(i, p) = c * vip - s * viq;
          V(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  SymEig out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = a(i, i);

  // sort ascending, permuting columns of V alongside
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return out.values[i] < out.values[j];
  });
  Vec vals(n);
  Mat Vs(n);
  for (std::size_t j = 0; j < n; ++j) {
    vals[j] = out.values[order[j]];
    for (std::size_t i = 0; i < n; ++i) Vs(i, j) = V(i, order[j]);
  }
  out.values = vals;
  out.vectors = Vs;
  return out;
}

BallLsqSolution ball_constrained_lsq(const Mat& A, const Vec& c, double rho,
                                     double tol) {
  const std::size_t n = A.n();
  if (rho <= 0.0) throw Error("ball_constrained_lsq: rho must be positive");
  if (c.size() != n) throw Error("ball_constrained_lsq: dimension mismatch");

  // S = A A^T, g = A c; normal equations S y = g.
  Mat S(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t m = 0; m < n; ++m) s += A(i, m) * A(j, m);
      S(i, j) = s;
    }
  const Vec g = matvec(A, c);

  const SymEig eig = jacobi_eigh(S);
  const double dmax = std::max(eig.values.back(), 0.0);
  const double cut = 1e-13 * std::max(dmax, 1e-300);

  // coordinates of g in the eigenbasis; zero out null-space components
  // (g = A c lies in range(S) up to rounding)
  Vec q(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += eig.vectors(i, j) * g[i];
    q[j] = (eig.values[j] > cut) ? s : 0.0;
  }

  auto y_of_lambda = [&](double lambda) {
    Vec y(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (q[j] == 0.0) continue;
      const double coef = q[j] / (eig.values[j] + lambda);
      for (std::size_t i = 0; i < n; ++i) y[i] += coef * eig.vectors(i, j);
    }
    return y;
  };
  auto norm_of_lambda = [&](double lambda) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (q[j] == 0.0) continue;
      const double t = q[j] / (eig.values[j] + lambda);
      s += t * t;
    }
    return std::sqrt(s);
  };

  BallLsqSolution out;

  // interior branch: minimum-norm unconstrained solution
  const double n0 = norm_of_lambda(0.0);
  if (n0 <= rho * (1.0 + 1e-14)) {
    out.y_star = y_of_lambda(0.0);
    out.multiplier = 0.0;
    out.on_boundary = std::fabs(n0 - rho) <= tol * rho;
    out.objective = norm(c - tmatvec(A, out.y_star));
    return out;
  }

  // boundary branch: ||y(lambda)|| = rho, lambda in (0, ||g||/rho]
  double lo = 0.0;
  double hi = norm(g) / rho;
  double lambda = 0.5 * hi;
  const double target_tol = 1e-10 * rho;
  int it = 0;
  for (; it < 200; ++it) {
    const double nl = norm_of_lambda(lambda);
    const double fl = nl - rho;
    if (std::fabs(fl) <= target_tol) break;
    if (fl > 0.0)
      lo = lambda;
    else
      hi = lambda;
    // Newton step on ||y(lambda)|| - rho with bisection safeguard
    double dn = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (q[j] == 0.0) continue;
      const double dl = eig.values[j] + lambda;
      dn += q[j] * q[j] / (dl * dl * dl);
    }
    const double deriv = -dn / nl;
    double next = lambda - fl / deriv;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    lambda = next;
  }

  out.y_star = y_of_lambda(lambda);
  out.multiplier = lambda;
  out.on_boundary = true;
  out.iterations = it;
  out.objective = norm(c - tmatvec(A, out.y_star));
  return out;
}

}  // namespace smallball
