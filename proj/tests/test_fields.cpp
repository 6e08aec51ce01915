#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "smallball/errors.hpp"
#include "smallball/fields.hpp"
#include "smallball/kernels.hpp"
#include "smallball/linalg.hpp"

using namespace smallball;

namespace {

const char* kMinimalConstantDoc = R"({
  "family": "constant",
  "dimension": 2,
  "rho": 1.0,
  "parameters": { "b": [1.0, 0.0] }
})";

std::vector<VectorFieldSpec> builtin_instances() {
  Mat A = Mat::identity(2);
  Mat N(2);
  N(0, 0) = 1.0;
  N(1, 1) = -0.2;
  Mat R(3);
  R(0, 1) = 0.7;
  R(1, 0) = -0.3;
  R(1, 2) = 0.4;
  R(2, 2) = 0.9;
  return {
      make_constant_field({1.0, 0.0}, 1.0),
      make_affine_field(A, {2.0, 0.0}, 1.0),
      make_affine_field(N, {2.0, 0.0}, 1.0),
      make_affine_field(R, {1.5, -0.5, 0.25}, 0.8),
      make_smooth_perturbed_field(A, {2.0, 0.0}, 0.3, 1.0),
      make_smooth_perturbed_field(R, {1.0, 0.5, -0.25}, -0.2, 0.8),
      make_quadratic_field({1.0, 1.0}, {0.5, -0.25}, 0.5),
  };
}

ParseError::Kind parse_kind(const std::string& doc) {
  try {
    parse_problem(doc);
  } catch (const ParseError& e) {
    return e.kind;
  }
  FAIL("expected a ParseError");
  return ParseError::Kind::malformed_document;
}

}  // namespace

TEST_SUITE("fields") {

TEST_CASE("constant field evaluates to b with zero jacobian") {
  const VectorFieldSpec f = make_constant_field({1.0, 0.0}, 1.0);
  CHECK(f.eval({0.3, 0.4}) == Vec{1.0, 0.0});
  CHECK(f.jac({0.2, -0.1}) == Mat(2));
  CHECK(f.analytic->theta == 0.0);
  CHECK(f.analytic->gamma == 0.0);
}

TEST_CASE("affine field: value, jacobian, analytic constants") {
  const VectorFieldSpec f = make_affine_field(Mat::identity(2), {2.0, 0.0}, 1.0);
  CHECK(f.eval({1.0, 1.0}) == Vec{3.0, 1.0});
  CHECK(f.jac({0.0, 0.0}) == Mat::identity(2));
  CHECK(f.analytic->theta == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.analytic->gamma == 0.0);
}

TEST_CASE("affine field with A = 0 reduces to the constant field") {
  const VectorFieldSpec f = make_affine_field(Mat(2), {0.7, -0.1}, 1.0);
  const VectorFieldSpec g = make_constant_field({0.7, -0.1}, 1.0);
  std::mt19937_64 rng(41);
  for (int t = 0; t < 20; ++t) {
    const Vec x = oracle::random_ball(rng, 2, 1.0);
    CHECK(f.eval(x) == g.eval(x));
  }
}

TEST_CASE("perturbed field with eps = 0 is exactly affine") {
  Mat A(2);
  A(0, 0) = 0.5;
  A(0, 1) = -1.0;
  A(1, 0) = 0.25;
  A(1, 1) = 2.0;
  const VectorFieldSpec p = make_smooth_perturbed_field(A, {1.0, 2.0}, 0.0, 1.0);
  const VectorFieldSpec a = make_affine_field(A, {1.0, 2.0}, 1.0);
  std::mt19937_64 rng(42);
  for (int t = 0; t < 20; ++t) {
    const Vec x = oracle::random_ball(rng, 2, 1.0);
    CHECK(p.eval(x) == a.eval(x));
    CHECK(p.jac(x) == a.jac(x));
  }
}

TEST_CASE("quadratic field: componentwise squares, derivative vanishes at 0") {
  const VectorFieldSpec f = make_quadratic_field({1.0, 1.0}, {0.0, 0.0}, 0.5);
  const Vec v = f.eval({0.3, -0.2});
  CHECK(v[0] == doctest::Approx(0.09).epsilon(1e-15));
  CHECK(v[1] == doctest::Approx(0.04).epsilon(1e-15));
  CHECK(operator_norm(f.jac({0.0, 0.0})) == 0.0);
  CHECK(f.analytic->theta == doctest::Approx(1.0));  // 2 rho max|coeff|
  CHECK(f.analytic->gamma == doctest::Approx(2.0));
}

TEST_CASE("jacobian consistency: analytic vs central differences, all families") {
  std::mt19937_64 rng(43);
  for (const VectorFieldSpec& f : builtin_instances()) {
    for (int t = 0; t < 100; ++t) {
      const Vec x = oracle::random_ball(rng, f.dim, 0.9 * f.rho);
      const Mat J = f.jac(x);
      const Mat Jfd = finite_diff_jacobian(f, x, 1e-5);
      CHECK(frobenius_norm(J - Jfd) <= 1e-5 * (1.0 + frobenius_norm(J)));
    }
  }
}

TEST_CASE("perturbed jacobian matches finite differences tightly") {
  const VectorFieldSpec f =
      make_smooth_perturbed_field(Mat::identity(2), {2.0, 0.0}, 0.3, 1.0);
  std::mt19937_64 rng(44);
  for (int t = 0; t < 50; ++t) {
    const Vec x = oracle::random_ball(rng, 2, 0.9);
    CHECK(frobenius_norm(f.jac(x) - finite_diff_jacobian(f, x, 1e-5)) <= 1e-6);
  }
}

TEST_CASE("finite differences: exact for constant and affine fields") {
  const VectorFieldSpec c = make_constant_field({1.0, -2.0}, 1.0);
  CHECK(frobenius_norm(finite_diff_jacobian(c, {0.1, 0.2}, 1e-5)) <= 1e-11);
  Mat A(2);
  A(0, 0) = 1.0;
  A(0, 1) = 2.0;
  A(1, 0) = -0.5;
  A(1, 1) = 0.25;
  const VectorFieldSpec a = make_affine_field(A, {0.0, 1.0}, 1.0);
  CHECK(frobenius_norm(finite_diff_jacobian(a, {0.1, 0.2}, 1e-5) - A) <= 1e-9);
}

TEST_CASE("finite differences: positive step required, domain respected") {
  const VectorFieldSpec f = make_constant_field({1.0, 0.0}, 1.0);
  CHECK_THROWS_AS(finite_diff_jacobian(f, {0.0, 0.0}, 0.0), Error);
  CHECK_THROWS_AS(finite_diff_jacobian(f, {0.0, 0.0}, -1e-5), Error);

  // near the boundary every probe must stay inside the ball
  double max_norm_seen = 0.0;
  VectorFieldSpec probe = f;
  probe.eval = [&max_norm_seen](const Vec& x) {
    max_norm_seen = std::max(max_norm_seen, norm(x));
    return Vec{1.0, 0.0};
  };
  const Vec x_edge = {1.0 - 1e-6, 0.0};
  finite_diff_jacobian(probe, x_edge, 1e-5);
  CHECK(max_norm_seen <= 1.0 + 1e-15);
}

TEST_CASE("batch evaluation agrees with scalar evaluation for every family") {
  std::mt19937_64 rng(45);
  for (const VectorFieldSpec& f : builtin_instances()) {
    const std::size_t k = 37;
    kernels::Batch X(f.dim, k), OUT(f.dim, k);
    for (std::size_t i = 0; i < k; ++i)
      X.set_point(i, oracle::random_ball(rng, f.dim, f.rho));
    eval_field_batch(f, k, X.data(), OUT.data());
    for (std::size_t i = 0; i < k; ++i) {
      const Vec expected = f.eval(X.point(i));
      const Vec got = OUT.point(i);
      for (std::size_t j = 0; j < f.dim; ++j)
        CHECK(got[j] == doctest::Approx(expected[j]).epsilon(1e-14));
    }
  }
}

TEST_CASE("generic fallback batch path loops the scalar evaluator") {
  VectorFieldSpec f = make_affine_field(Mat::identity(2), {1.0, 1.0}, 1.0);
  f.eval_batch = nullptr;  // force the fallback
  kernels::Batch X(2, 5), OUT(2, 5);
  std::mt19937_64 rng(46);
  for (std::size_t i = 0; i < 5; ++i) X.set_point(i, oracle::random_ball(rng, 2, 1.0));
  eval_field_batch(f, 5, X.data(), OUT.data());
  for (std::size_t i = 0; i < 5; ++i) CHECK(OUT.point(i) == f.eval(X.point(i)));
}

TEST_CASE("parse: minimal constant document") {
  const Problem p = parse_problem(kMinimalConstantDoc);
  CHECK(p.config.family == Family::constant);
  CHECK(p.field.eval({0.2, 0.2}) == Vec{1.0, 0.0});
  CHECK(p.config.budgets.verify_samples == 10000);  // defaults filled in
  CHECK(p.config.seed == 0);
}

TEST_CASE("parse: distinct named errors") {
  CHECK(parse_kind("{ not json") == ParseError::Kind::malformed_document);
  CHECK(parse_kind(R"({"dimension":2,"rho":1,"parameters":{"b":[1,0]}})") ==
        ParseError::Kind::missing_key);
  CHECK(parse_kind(
            R"({"family":"constant","dimension":2,"rho":1,"parameters":{"b":[1,0]},"extra":1})") ==
        ParseError::Kind::unknown_key);
  CHECK(parse_kind(
            R"({"family":"warp","dimension":2,"rho":1,"parameters":{"b":[1,0]}})") ==
        ParseError::Kind::unknown_family);
  CHECK(parse_kind(
            R"({"family":"constant","dimension":2,"rho":0.0,"parameters":{"b":[1,0]}})") ==
        ParseError::Kind::non_positive_rho);
  CHECK(parse_kind(
            R"({"family":"constant","dimension":2,"rho":-2,"parameters":{"b":[1,0]}})") ==
        ParseError::Kind::non_positive_rho);
  // 2x2 A against a 3-vector b
  CHECK(parse_kind(
            R"({"family":"affine","dimension":2,"rho":1,
                "parameters":{"A":[[1,0],[0,1]],"b":[1,0,0]}})") ==
        ParseError::Kind::dimension_mismatch);
  CHECK(parse_kind(
            R"({"family":"affine","dimension":3,"rho":1,
                "parameters":{"A":[[1,0],[0,1]],"b":[1,0,0]}})") ==
        ParseError::Kind::dimension_mismatch);
  CHECK(parse_kind(
            R"({"family":"constant","dimension":2,"rho":1,"parameters":{"b":[1,0]},
                "budgets":{"verify_samples":0}})") == ParseError::Kind::bad_value);
  CHECK(parse_kind(
            R"({"family":"constant","dimension":2,"rho":1,
                "parameters":{"b":[1,0],"eps":0.5}})") == ParseError::Kind::unknown_key);
  CHECK(parse_kind(
            R"({"family":"affine_plus_smooth","dimension":2,"rho":1,
                "parameters":{"A":[[1,0],[0,1]]}})") == ParseError::Kind::missing_key);
}

TEST_CASE("parse/emit round-trips the problem description") {
  const char* docs[] = {
      kMinimalConstantDoc,
      R"({"family":"affine","dimension":2,"rho":1.0,
          "parameters":{"A":[[1.0,0.5],[0.25,-1.0]],"b":[2.0,0.0]},
          "budgets":{"theta_samples":500,"verify_samples":2000},"seed":7})",
      R"({"family":"affine_plus_smooth","dimension":3,"rho":0.75,
          "parameters":{"A":[[1,0,0],[0,1,0],[0,0,1]],"b":[1,0,0],"eps":0.25},
          "seed":1234})",
      R"({"family":"gradient_quadratic","dimension":2,"rho":0.5,
          "parameters":{"b":[0.5,0.0]}})",
      R"({"family":"shifted","dimension":2,"rho":0.5,
          "parameters":{"d":[1.0,0.0]},"seed":99})",
  };
  for (const char* doc : docs) {
    const ProblemConfig c1 = parse_problem(doc).config;
    const std::string emitted = emit_problem(c1);
    const ProblemConfig c2 = parse_problem(emitted).config;
    CHECK(c1.family == c2.family);
    CHECK(c1.dimension == c2.dimension);
    CHECK(c1.rho == c2.rho);
    CHECK(c1.A.has_value() == c2.A.has_value());
    if (c1.A) CHECK(*c1.A == *c2.A);
    CHECK(c1.b == c2.b);
    CHECK(c1.eps == c2.eps);
    CHECK(c1.d == c2.d);
    CHECK(c1.budgets.theta_samples == c2.budgets.theta_samples);
    CHECK(c1.budgets.gamma_samples == c2.budgets.gamma_samples);
    CHECK(c1.budgets.minty_starts == c2.budgets.minty_starts);
    CHECK(c1.budgets.verify_samples == c2.budgets.verify_samples);
    CHECK(c1.seed == c2.seed);
    // emitting again reproduces the same text exactly
    CHECK(emit_problem(c2) == emitted);
  }
}

TEST_CASE("parse: shifted family builds Phi = Psi - w with analytic M1") {
  const Problem p = parse_problem(
      R"({"family":"shifted","dimension":2,"rho":0.5,"parameters":{"d":[1.0,0.0]}})");
  // base Psi(x) = (x1^2, x2^2): theta1 = 1, gamma1 = 2, M1 = 4, w = (4, 0)
  CHECK(p.field.eval({0.0, 0.0}) == Vec{-4.0, 0.0});
  CHECK(p.field.eval({0.5, 0.0}) == Vec{0.25 - 4.0, 0.0});
  CHECK(p.field.family == "shifted");
}

}  // TEST_SUITE
