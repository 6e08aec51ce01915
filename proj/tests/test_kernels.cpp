#include <doctest.h>

#include <cstring>
#include <random>
#include <vector>

#include "smallball/kernels.hpp"

namespace sk = smallball::kernels;

namespace {

std::vector<double> random_buffer(std::mt19937_64& rng, std::size_t len) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> v(len);
  for (auto& x : v) x = u(rng);
  // sprinkle exact zeros of both signs
  if (len > 4) {
    v[1] = 0.0;
    v[3] = -0.0;
  }
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void check_variant_matches_scalar(const sk::Ops& variant) {
  const auto& ref = sk::scalar_ops();
  std::mt19937_64 rng(7001);
  for (const std::size_t n : {1u, 2u, 3u, 4u, 7u}) {
    for (const std::size_t k : {1u, 3u, 4u, 5u, 31u, 1024u, 4097u}) {
      const auto X = random_buffer(rng, n * k);
      const auto Y = random_buffer(rng, n * k);
      const auto A = random_buffer(rng, n * n);
      const auto b = random_buffer(rng, n);
      const auto v = random_buffer(rng, n);

      std::vector<double> o1(n * k), o2(n * k);
      variant.affine_map(n, k, A.data(), b.data(), X.data(), o1.data());
      ref.affine_map(n, k, A.data(), b.data(), X.data(), o2.data());
      CHECK(bitwise_equal(o1, o2));

      variant.square_scale_add(n, k, v.data(), b.data(), X.data(), o1.data());
      ref.square_scale_add(n, k, v.data(), b.data(), X.data(), o2.data());
      CHECK(bitwise_equal(o1, o2));

      variant.vec_minus_batch(n, k, v.data(), X.data(), o1.data());
      ref.vec_minus_batch(n, k, v.data(), X.data(), o2.data());
      CHECK(bitwise_equal(o1, o2));

      variant.batch_minus_vec(n, k, X.data(), v.data(), o1.data());
      ref.batch_minus_vec(n, k, X.data(), v.data(), o2.data());
      CHECK(bitwise_equal(o1, o2));

      variant.sub_pairwise(n, k, X.data(), Y.data(), o1.data());
      ref.sub_pairwise(n, k, X.data(), Y.data(), o2.data());
      CHECK(bitwise_equal(o1, o2));

      std::vector<double> s1(k), s2(k);
      variant.dot_with_vec(n, k, X.data(), v.data(), s1.data());
      ref.dot_with_vec(n, k, X.data(), v.data(), s2.data());
      CHECK(bitwise_equal(s1, s2));

      variant.dot_pairwise(n, k, X.data(), Y.data(), s1.data());
      ref.dot_pairwise(n, k, X.data(), Y.data(), s2.data());
      CHECK(bitwise_equal(s1, s2));

      variant.norms_sq(n, k, X.data(), s1.data());
      ref.norms_sq(n, k, X.data(), s2.data());
      CHECK(bitwise_equal(s1, s2));

      variant.max_elementwise(k, X.data(), Y.data(), s1.data());
      ref.max_elementwise(k, X.data(), Y.data(), s2.data());
      CHECK(bitwise_equal(s1, s2));

      variant.abs_values(k, X.data(), s1.data());
      ref.abs_values(k, X.data(), s2.data());
      CHECK(bitwise_equal(s1, s2));
    }
  }
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar kernels: hand-checked values") {
  const auto& ops = sk::scalar_ops();
  // n=2, k=3; A = [[1,2],[3,4]], b = (10, 20)
  const double A[] = {1, 2, 3, 4};
  const double b[] = {10, 20};
  // points (1,4), (2,5), (3,6) in SoA: comp0 = 1,2,3; comp1 = 4,5,6
  const double X[] = {1, 2, 3, 4, 5, 6};
  double out[6];
  ops.affine_map(2, 3, A, b, X, out);
  // A x + b for (1,4): (1+8+10, 3+16+20) = (19, 39)
  CHECK(out[0] == 19.0);
  CHECK(out[3] == 39.0);
  CHECK(out[1] == 22.0);   // (2,5): 2+10+10
  CHECK(out[4] == 46.0);   // 6+20+20

  const double q[] = {2, -1};
  ops.square_scale_add(2, 3, q, b, X, out);
  CHECK(out[0] == 12.0);   // 2*1+10
  CHECK(out[3] == 4.0);    // -16+20

  double dots[3];
  const double v[] = {1, -1};
  ops.dot_with_vec(2, 3, X, v, dots);
  CHECK(dots[0] == -3.0);
  CHECK(dots[1] == -3.0);
  CHECK(dots[2] == -3.0);

  ops.norms_sq(2, 3, X, dots);
  CHECK(dots[0] == 17.0);
  CHECK(dots[2] == 45.0);
}

TEST_CASE("argmax scans in index order and breaks ties low") {
  const double a[] = {1.0, 5.0, 5.0, -2.0, 5.0};
  double m = 0.0;
  CHECK(sk::argmax(5, a, &m) == 1);
  CHECK(m == 5.0);
}

TEST_CASE("batch set/get round trip") {
  sk::Batch batch(3, 4);
  batch.set_point(2, {1.0, 2.0, 3.0});
  CHECK(batch.point(2) == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(batch.comp(1)[2] == 2.0);
}

TEST_CASE("active variant is a known name") {
  const std::string name = sk::active_name();
  CHECK((name == "scalar" || name == "avx2" || name == "neon"));
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 kernels match scalar bitwise") {
  if (!sk::avx2_supported()) return;
  check_variant_matches_scalar(sk::avx2_ops());
}
#endif

#if defined(__aarch64__)
TEST_CASE("neon kernels match scalar bitwise") {
  check_variant_matches_scalar(sk::neon_ops());
}
#endif

TEST_CASE("active kernels match scalar bitwise") {
  check_variant_matches_scalar(sk::active_ops());
}

}  // TEST_SUITE
