#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "oracles.hpp"
#include "smallball/certify.hpp"
#include "smallball/errors.hpp"
#include "smallball/report.hpp"
#include "smallball/solve.hpp"
#include "smallball/verify.hpp"

using namespace smallball;

namespace {

VectorFieldSpec affine_reference() {
  return make_affine_field(Mat::identity(2), {2.0, 0.0}, 1.0);
}

VectorFieldSpec nonmonotone_reference() {
  Mat A(2);
  A(0, 0) = 1.0;
  A(1, 1) = -0.2;
  return make_affine_field(A, {2.0, 0.0}, 1.0);
}

Vec rotate2(const Vec& x, double angle) {
  return {std::cos(angle) * x[0] - std::sin(angle) * x[1],
          std::sin(angle) * x[0] + std::cos(angle) * x[1]};
}

}  // namespace

TEST_SUITE("verify") {

TEST_CASE("stampacchia closed form: boundary solution and center") {
  const VectorFieldSpec c = make_constant_field({1.0, 0.0}, 1.0);
  const double r = 0.4;
  CHECK(stampacchia_residual(c, {-r, 0.0}, r) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(stampacchia_residual(c, {0.0, 0.0}, r) == doctest::Approx(r));
}

TEST_CASE("stampacchia closed form matches the sampled sup") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + t % 2;  // angular sampling gap grows with n
    Mat A(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) A(i, j) = -1.0 + 2.0 * u01(rng);
    Vec b(n);
    for (auto& v : b) v = -1.0 + 2.0 * u01(rng);
    const VectorFieldSpec f = make_affine_field(A, b, 1.0);
    const double r = 0.2 + 0.8 * u01(rng);
    const Vec x = oracle::random_ball(rng, n, r);

    const double closed = stampacchia_residual(f, x, r);
    const double sampled =
        oracle::sampled_sup_linear(f.eval(x), x, r, 100000, 7100 + t);
    CHECK(sampled <= closed + 1e-12);
    CHECK(std::fabs(closed - sampled) <= 1e-3 * (1.0 + std::fabs(closed)));
  }
}

TEST_CASE("minty_sup: constant field") {
  const VectorFieldSpec c = make_constant_field({1.0, 0.0}, 1.0);
  const double r = 0.5;
  // at the solution the sup is 0 (attained only at y = x)
  const Vec x_star = {-r, 0.0};
  const MintySup at_solution = minty_sup(c, x_star, r, 16, 5);
  CHECK(at_solution.estimate <= 1e-12);
  CHECK(at_solution.estimate >= -1e-9);

  // at the center the sup is r ||b||
  const MintySup at_center = minty_sup(c, Vec{0.0, 0.0}, r, 16, 5);
  CHECK(at_center.estimate == doctest::Approx(r).epsilon(1e-9));
}

TEST_CASE("minty_sup: at the computed solution of a monotone instance") {
  const VectorFieldSpec f = affine_reference();
  const SolutionCertificate sol = fixed_point_solve(f, 0.25);
  REQUIRE(sol.converged);
  const MintySup m = minty_sup(f, sol.x_star, 0.25, 32, 9);
  CHECK(m.estimate <= 1e-10);
}

TEST_CASE("double_vi_check: constant field has strictly negative margins") {
  const VectorFieldSpec c = make_constant_field({1.0, 0.0}, 1.0);
  const double r = 0.5;
  const DoubleViCheck chk = double_vi_check(c, {-r, 0.0}, r, 10000, 3);
  CHECK(chk.samples > 9000);
  CHECK(chk.worst_margin < 0.0);
  CHECK(chk.witness.size() == 2);
}

TEST_CASE("double_vi_check: affine instance passes, mirrored point fails") {
  const VectorFieldSpec f = affine_reference();
  const SolutionCertificate sol = fixed_point_solve(f, 0.25);
  REQUIRE(sol.converged);

  const DoubleViCheck good = double_vi_check(f, sol.x_star, 0.25, 10000, 3);
  CHECK(good.worst_margin < 0.0);

  // negative control: by uniqueness no other sphere point satisfies the
  // conclusion, and -x* fails loudly
  const Vec bad = -1.0 * sol.x_star;
  const DoubleViCheck control = double_vi_check(f, bad, 0.25, 10000, 3);
  CHECK(control.worst_margin > 0.0);
}

TEST_CASE("saddle_check: zero violations at the saddle, violations off it") {
  const VectorFieldSpec f = nonmonotone_reference();
  const ConstantsCertificate cert = certify_field(f, Budgets{}, 0);
  const SolutionCertificate sol = fixed_point_solve(f, cert.r_max);
  REQUIRE(sol.converged);

  const SaddleCheck at_saddle =
      saddle_check(f, sol.x_star, sol.y_star, cert.r_max, 10000, 5);
  CHECK(at_saddle.violations == 0);

  const Vec x_off = rotate2(sol.x_star, 0.1);
  const SaddleCheck off_saddle =
      saddle_check(f, x_off, best_response_y(f, x_off, cert.r_max), cert.r_max,
                   10000, 5);
  CHECK(off_saddle.violations > 0);
  CHECK(off_saddle.worst > 0.0);
}

TEST_CASE("uniqueness_probe: single cluster on the reference instances") {
  const VectorFieldSpec c = make_constant_field({1.0, 0.0}, 1.0);
  const UniquenessProbe pc = uniqueness_probe(c, 0.5, 20, 7);
  CHECK(pc.converged == 20);
  CHECK(pc.clusters == 1);

  const VectorFieldSpec f = affine_reference();
  const UniquenessProbe pa = uniqueness_probe(f, 0.25, 50, 7);
  CHECK(pa.converged == 50);
  CHECK(pa.clusters == 1);
  CHECK(pa.max_pairwise_distance <= 1e-8);
}

TEST_CASE("monotonicity_probe: classification across instances") {
  const VectorFieldSpec c = make_constant_field({1.0, 0.0}, 1.0);
  CHECK_FALSE(monotonicity_probe(c, 1.0, 10000, 3).violation_found);

  const VectorFieldSpec id = affine_reference();
  CHECK_FALSE(monotonicity_probe(id, 1.0, 100000, 3).violation_found);

  const MonotonicityProbe probe = monotonicity_probe(nonmonotone_reference(), 1.0, 10000, 3);
  CHECK(probe.violation_found);
  // the witness pair really violates monotonicity
  const VectorFieldSpec f = nonmonotone_reference();
  CHECK(dot(f.eval(probe.x) - f.eval(probe.y), probe.x - probe.y) ==
        doctest::Approx(probe.value));
  CHECK(probe.value < 0.0);
}

TEST_CASE("verify_solution: full pass on the built-in instances") {
  struct Case {
    VectorFieldSpec field;
    double r;
  };
  std::vector<Case> cases;
  cases.push_back({make_constant_field({1.0, 0.0}, 1.0), 0.5});
  cases.push_back({affine_reference(), 0.25});
  {
    const VectorFieldSpec f = nonmonotone_reference();
    cases.push_back({f, certify_field(f, Budgets{}, 0).r_max});
  }
  for (const Case& c : cases) {
    const SolutionCertificate sol = fixed_point_solve(c.field, c.r);
    REQUIRE(sol.converged);
    VerifyOptions opts;
    opts.samples = 10000;
    opts.seed = 13;
    const VerificationReport rep = verify_solution(c.field, sol, opts);
    CHECK(rep.passed);
    CHECK(rep.double_vi.worst_margin < 0.0);
    CHECK(rep.minty.estimate <= opts.tol);
    CHECK(rep.saddle.violations == 0);
    CHECK(rep.uniqueness.clusters == 1);
    CHECK(rep.stampacchia_sup <= opts.tol);
  }
}

TEST_CASE("verify_solution: rejects zero samples") {
  const VectorFieldSpec f = affine_reference();
  const SolutionCertificate sol = fixed_point_solve(f, 0.25);
  VerifyOptions opts;
  opts.samples = 0;
  CHECK_THROWS_AS(verify_solution(f, sol, opts), Error);
}

TEST_CASE("reports are deterministic and thread-count invariant") {
  const VectorFieldSpec f = nonmonotone_reference();
  const ConstantsCertificate cert = certify_field(f, Budgets{}, 0);
  const SolutionCertificate sol = fixed_point_solve(f, cert.r_max);
  VerifyOptions opts;
  opts.samples = 20000;
  opts.seed = 99;

  const std::string a = dump_report(report_to_json(verify_solution(f, sol, opts)));
  const std::string b = dump_report(report_to_json(verify_solution(f, sol, opts)));
  CHECK(a == b);

  setenv("SMALLBALL_VI_THREADS", "3", 1);
  const std::string c = dump_report(report_to_json(verify_solution(f, sol, opts)));
  unsetenv("SMALLBALL_VI_THREADS");
  CHECK(a == c);
}

}  // TEST_SUITE
