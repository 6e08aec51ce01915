#include "smallball/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smallball/errors.hpp"
#include "smallball/kernels.hpp"
#include "smallball/parallel.hpp"
#include "smallball/sampling.hpp"

namespace smallball {

namespace {
constexpr std::size_t kChunk = 4096;
}

double stampacchia_residual(const VectorFieldSpec& f, const Vec& x, double r) {
  if (norm(x) > r * (1.0 + 1e-9))
    throw Error("stampacchia_residual: x outside the r-ball");
  const Vec phi = f(x);
  return dot(phi, x) + r * norm(phi);
}

MintySup minty_sup(const VectorFieldSpec& f, const Vec& x, double r, int starts,
                   std::uint64_t seed, long samples) {
  const std::size_t n = f.dim;
  MintySup out;
  out.starts = starts;
  double best = -HUGE_VAL;

  // batched quasi-random sampling of h(y) = <Phi(y), x - y>
  if (samples > 0) {
    const std::size_t total = static_cast<std::size_t>(samples);
    const std::size_t nchunks = (total + kChunk - 1) / kChunk;
    std::vector<double> chunk_best(nchunks, -HUGE_VAL);
    for_chunks(total, kChunk, [&](std::size_t ci, std::size_t b, std::size_t e) {
      const std::size_t k = e - b;
      kernels::Batch Y(n, k), PHI(n, k), D(n, k);
      for (std::size_t i = 0; i < k; ++i) {
        SampleRng rng(seed, 0x317A, b + i);
        Y.set_point(i, ball_sample(rng, n, r));
      }
      eval_field_batch(f, k, Y.data(), PHI.data());
      const auto& ops = kernels::active_ops();
      ops.vec_minus_batch(n, k, x.data(), Y.data(), D.data());
      std::vector<double> h(k);
      ops.dot_pairwise(n, k, PHI.data(), D.data(), h.data());
      double m = 0.0;
      kernels::argmax(k, h.data(), &m);
      chunk_best[ci] = m;
    });
    for (double m : chunk_best) best = std::max(best, m);
  }

  // multistart projected-gradient ascent, step from a local Lipschitz probe
  for (int s = 0; s < starts; ++s) {
    Vec y;
    if (s == 0) {
      y = project_ball(x, r);
    } else if (s == 1) {
      y = -1.0 * project_ball(x, r);
    } else {
      SampleRng rng(seed, 0x317B, static_cast<std::uint64_t>(s));
      y = (s % 2 == 0) ? ball_sample(rng, n, r) : sphere_sample(rng, n, r);
    }

    auto grad_h = [&](const Vec& yy) {
      // gradient of h: Phi'(y)^T (x - y) - Phi(y)
      Vec g = tmatvec(f.jac(yy), x - yy);
      axpy(-1.0, f(yy), g);
      return g;
    };
    auto h_of = [&](const Vec& yy) { return dot(f(yy), x - yy); };

    // local Lipschitz estimate for the step
    const double probe = std::max(1e-6 * r, 1e-9);
    Vec yp = y;
    yp[0] = std::min(yp[0] + probe, r);
    yp = project_ball(yp, r);
    const double gdiff = distance(grad_h(y), grad_h(yp));
    const double pd = std::max(distance(y, yp), 1e-12);
    double step = 1.0 / (2.0 * std::max(gdiff / pd, 1e-9));
    step = std::min(step, r);

    double hv = h_of(y);
    best = std::max(best, hv);
    for (int it = 0; it < 300; ++it) {
      const Vec g = grad_h(y);
      double st = step;
      Vec cand;
      double hc = -HUGE_VAL;
      bool up = false;
      for (int bt = 0; bt < 40; ++bt) {
        cand = project_ball(y + st * g, r);
        hc = h_of(cand);
        if (hc > hv) {
          up = true;
          break;
        }
        st *= 0.5;
        if (st < 1e-14 * r) break;
      }
      if (!up) break;
      const double move = distance(y, cand);
      y = cand;
      hv = hc;
      best = std::max(best, hv);
      if (move <= 1e-12 * r) break;
    }
  }

  out.estimate = best;
  return out;
}

DoubleViCheck double_vi_check(const VectorFieldSpec& f, const Vec& x_star, double r,
                              long samples, std::uint64_t seed, double exclusion_eps) {
  const std::size_t n = f.dim;
  if (exclusion_eps < 0.0) exclusion_eps = 1e-6 * r;
  const Vec phi_star = f(x_star);

  struct Slot {
    double worst = -HUGE_VAL;
    double worst_norm = -HUGE_VAL;
    Vec witness;
    long counted = 0;
  };
  const std::size_t total = static_cast<std::size_t>(std::max<long>(samples, 0));
  const std::size_t nchunks = (total + kChunk - 1) / kChunk;
  std::vector<Slot> slots(nchunks);

  for_chunks(total, kChunk, [&](std::size_t ci, std::size_t b, std::size_t e) {
    const std::size_t k = e - b;
    kernels::Batch Y(n, k), PHI(n, k), D(n, k);
    std::vector<bool> keep(k, true);
    for (std::size_t i = 0; i < k; ++i) {
      SampleRng rng(seed, 0xDB1, b + i);
      Vec y;
      switch ((b + i) % 5) {
        case 0:
        case 1:
        case 2:
          y = ball_sample(rng, n, r);
          break;
        case 3:
          y = sphere_sample(rng, n, r);
          break;
        default: {
          // near-x* probes at log-spaced distances
          const double scale = r * std::pow(10.0, -5.0 * rng.u01());
          Vec dir = sphere_sample(rng, n, 1.0);
          y = x_star;
          axpy(scale, dir, y);
          y = project_ball(y, r);
          break;
        }
      }
      if (distance(y, x_star) <= exclusion_eps) keep[i] = false;
      Y.set_point(i, y);
    }

    eval_field_batch(f, k, Y.data(), PHI.data());
    const auto& ops = kernels::active_ops();
    ops.vec_minus_batch(n, k, x_star.data(), Y.data(), D.data());  // d_i = x* - y_i
    std::vector<double> t1(k), t2(k), m(k), d2(k);
    ops.dot_with_vec(n, k, D.data(), phi_star.data(), t1.data());
    ops.dot_pairwise(n, k, PHI.data(), D.data(), t2.data());
    ops.max_elementwise(k, t1.data(), t2.data(), m.data());
    ops.norms_sq(n, k, D.data(), d2.data());

    Slot& s = slots[ci];
    for (std::size_t i = 0; i < k; ++i) {
      if (!keep[i]) continue;
      ++s.counted;
      if (m[i] > s.worst) {
        s.worst = m[i];
        s.witness = Y.point(i);
      }
      const double nm = m[i] / std::sqrt(d2[i]);
      if (nm > s.worst_norm) s.worst_norm = nm;
    }
  });

  DoubleViCheck out;
  out.worst_margin = -HUGE_VAL;
  out.worst_normalized = -HUGE_VAL;
  for (const Slot& s : slots) {
    out.samples += s.counted;
    if (s.counted == 0) continue;
    if (s.worst > out.worst_margin) {
      out.worst_margin = s.worst;
      out.witness = s.witness;
    }
    out.worst_normalized = std::max(out.worst_normalized, s.worst_norm);
  }
  return out;
}

SaddleCheck saddle_check(const VectorFieldSpec& f, const Vec& x_star,
                         const Vec& y_star, double r, long samples,
                         std::uint64_t seed, double tol) {
  const std::size_t n = f.dim;
  const Vec phi_star = f(x_star);
  const double j_star = dot(phi_star, x_star - y_star);

  struct Slot {
    long violations = 0;
    double worst = 0.0;
  };
  const std::size_t total = static_cast<std::size_t>(std::max<long>(samples, 0));
  const std::size_t nchunks = (total + kChunk - 1) / kChunk;
  std::vector<Slot> slots(nchunks);

  for_chunks(total, kChunk, [&](std::size_t ci, std::size_t b, std::size_t e) {
    const std::size_t k = e - b;
    kernels::Batch X(n, k), Y(n, k), PHIX(n, k), DX(n, k), DY(n, k);
    for (std::size_t i = 0; i < k; ++i) {
      SampleRng rx(seed, 0x5ADD1, b + i);
      SampleRng ry(seed, 0x5ADD2, b + i);
      X.set_point(i, ball_sample(rx, n, r));
      Y.set_point(i, ball_sample(ry, n, r));
    }
    eval_field_batch(f, k, X.data(), PHIX.data());
    const auto& ops = kernels::active_ops();
    // J(x*, y_i) = <Phi(x*), x* - y_i>
    ops.vec_minus_batch(n, k, x_star.data(), Y.data(), DY.data());
    std::vector<double> j_left(k);
    ops.dot_with_vec(n, k, DY.data(), phi_star.data(), j_left.data());
    // J(x_i, y*) = <Phi(x_i), x_i - y*>
    ops.batch_minus_vec(n, k, X.data(), y_star.data(), DX.data());
    std::vector<double> j_right(k);
    ops.dot_pairwise(n, k, PHIX.data(), DX.data(), j_right.data());

    Slot& s = slots[ci];
    for (std::size_t i = 0; i < k; ++i) {
      const double excess_left = j_left[i] - j_star;   // must be <= tol
      const double excess_right = j_star - j_right[i]; // must be <= tol
      if (excess_left > tol) {
        ++s.violations;
        s.worst = std::max(s.worst, excess_left);
      }
      if (excess_right > tol) {
        ++s.violations;
        s.worst = std::max(s.worst, excess_right);
      }
    }
  });

  SaddleCheck out;
  out.samples = static_cast<long>(total);
  for (const Slot& s : slots) {
    out.violations += s.violations;
    out.worst = std::max(out.worst, s.worst);
  }
  return out;
}

UniquenessProbe uniqueness_probe(const VectorFieldSpec& f, double r, int starts,
                                 std::uint64_t seed, const SolveOptions& opts) {
  const std::size_t n = f.dim;
  UniquenessProbe out;
  out.starts = starts;

  std::vector<Vec> endpoints(static_cast<std::size_t>(std::max(starts, 0)));
  std::vector<char> ok(endpoints.size(), 0);
  for_chunks(endpoints.size(), 1, [&](std::size_t ci, std::size_t b, std::size_t) {
    (void)ci;
    SampleRng rng(seed, 0x0415, b);
    const Vec x0 = sphere_sample(rng, n, r);
    const SolutionCertificate cert = fixed_point_solve_from(f, r, x0, opts);
    if (cert.converged) {
      endpoints[b] = cert.x_star;
      ok[b] = 1;
    }
  });

  const double cluster_radius = 1e-6;
  std::vector<Vec> reps;
  for (std::size_t i = 0; i < endpoints.size(); ++i) {
    if (!ok[i]) continue;
    ++out.converged;
    bool found = false;
    for (const Vec& rep : reps) {
      if (distance(rep, endpoints[i]) <= cluster_radius) {
        found = true;
        break;
      }
    }
    if (!found) reps.push_back(endpoints[i]);
    for (std::size_t j = 0; j < i; ++j)
      if (ok[j])
        out.max_pairwise_distance =
            std::max(out.max_pairwise_distance, distance(endpoints[i], endpoints[j]));
  }
  out.clusters = static_cast<int>(reps.size());
  return out;
}

MonotonicityProbe monotonicity_probe(const VectorFieldSpec& f, double rho,
                                     long samples, std::uint64_t seed, double tol) {
  const std::size_t n = f.dim;
  struct Slot {
    std::size_t first_idx = std::numeric_limits<std::size_t>::max();
    Vec x, y;
    double value = 0.0;
  };
  const std::size_t total = static_cast<std::size_t>(std::max<long>(samples, 0));
  const std::size_t nchunks = (total + kChunk - 1) / kChunk;
  std::vector<Slot> slots(nchunks);

  for_chunks(total, kChunk, [&](std::size_t ci, std::size_t b, std::size_t e) {
    const std::size_t k = e - b;
    kernels::Batch X(n, k), Y(n, k), PX(n, k), PY(n, k), DP(n, k), DXY(n, k);
    for (std::size_t i = 0; i < k; ++i) {
      SampleRng rx(seed, 0x303A, b + i);
      SampleRng ry(seed, 0x303B, b + i);
      X.set_point(i, ball_sample(rx, n, rho));
      Y.set_point(i, ball_sample(ry, n, rho));
    }
    eval_field_batch(f, k, X.data(), PX.data());
    eval_field_batch(f, k, Y.data(), PY.data());
    const auto& ops = kernels::active_ops();
    ops.sub_pairwise(n, k, PX.data(), PY.data(), DP.data());
    ops.sub_pairwise(n, k, X.data(), Y.data(), DXY.data());
    std::vector<double> v(k);
    ops.dot_pairwise(n, k, DP.data(), DXY.data(), v.data());
    Slot& s = slots[ci];
    for (std::size_t i = 0; i < k; ++i) {
      if (v[i] < -tol) {
        s.first_idx = b + i;
        s.x = X.point(i);
        s.y = Y.point(i);
        s.value = v[i];
        break;
      }
    }
  });

  MonotonicityProbe out;
  out.samples = static_cast<long>(total);
  for (const Slot& s : slots) {
    if (s.first_idx != std::numeric_limits<std::size_t>::max()) {
      out.violation_found = true;
      out.x = s.x;
      out.y = s.y;
      out.value = s.value;
      break;
    }
  }
  return out;
}

VerificationReport verify_solution(const VectorFieldSpec& f,
                                   const SolutionCertificate& sol,
                                   const VerifyOptions& opts) {
  if (opts.samples < 1) throw Error("verify: samples must be >= 1");

  VerificationReport rep;
  rep.r = sol.r;
  rep.tol = opts.tol;
  rep.seed = opts.seed;

  rep.double_vi = double_vi_check(f, sol.x_star, sol.r, opts.samples, opts.seed);
  rep.stampacchia_sup = stampacchia_residual(f, sol.x_star, sol.r);
  rep.minty = minty_sup(f, sol.x_star, sol.r, opts.minty_starts, opts.seed,
                        std::max<long>(opts.samples / 2, 1000));
  const Vec y_star =
      sol.y_star.empty() ? best_response_y(f, sol.x_star, sol.r) : sol.y_star;
  rep.saddle = saddle_check(f, sol.x_star, y_star, sol.r, opts.samples, opts.seed,
                            1e-9);
  rep.uniqueness = uniqueness_probe(f, sol.r, opts.uniqueness_starts, opts.seed,
                                    opts.solve);
  rep.monotonicity = monotonicity_probe(f, f.rho, std::min<long>(opts.samples, 100000),
                                        opts.seed);

  rep.passed = rep.double_vi.worst_margin < 0.0 && rep.minty.estimate <= opts.tol &&
               rep.saddle.violations == 0 && rep.uniqueness.clusters == 1;
  return rep;
}

}  // namespace smallball
