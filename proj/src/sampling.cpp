#include "smallball/sampling.hpp"

#include <cmath>

namespace smallball {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

SampleRng::SampleRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t s = splitmix64(seed ^ 0x853c49e6748fea9bULL);
  s = splitmix64(s ^ stream);
  state_ = splitmix64(s ^ (index * 0xda942042e4dd58b5ULL + 1));
}

std::uint64_t SampleRng::next_raw() {
  state_ = splitmix64(state_);
  return state_;
}

double SampleRng::u01() {
  return static_cast<double>(next_raw() >> 11) * 0x1.0p-53;
}

double SampleRng::gauss() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_gauss_;
  }
  // Box-Muller; u1 bounded away from 0
  double u1 = u01();
  if (u1 < 1e-300) u1 = 1e-300;
  const double u2 = u01();
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 6.283185307179586476925286766559 * u2;
  cached_gauss_ = rad * std::sin(ang);
  has_cached_ = true;
  return rad * std::cos(ang);
}

Vec ball_sample(SampleRng& rng, std::size_t n, double radius) {
  Vec x = sphere_sample(rng, n, radius);
  const double u = rng.u01();
  const double f = std::pow(u, 1.0 / static_cast<double>(n));
  for (double& v : x) v *= f;
  return x;
}

Vec sphere_sample(SampleRng& rng, std::size_t n, double radius) {
  Vec x(n);
  double ns = 0.0;
  do {
    for (std::size_t i = 0; i < n; ++i) x[i] = rng.gauss();
    ns = norm(x);
  } while (ns < 1e-12);
  const double f = radius / ns;
  for (double& v : x) v *= f;
  return x;
}

double halton(std::uint64_t index, int base) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

namespace {
constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                           31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

double inv_gauss_from_pair(double u1, double u2, bool second) {
  if (u1 < 1e-300) u1 = 1e-300;
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 6.283185307179586476925286766559 * u2;
  return second ? rad * std::sin(ang) : rad * std::cos(ang);
}
}  // namespace

Vec halton_ball_point(std::uint64_t index, std::size_t n, double radius) {
  // direction from Box-Muller over Halton pairs, radius from one more
  // Halton coordinate
  Vec x(n);
  std::size_t dim = 0;
  int prime_idx = 0;
  while (dim < n) {
    const double u1 = halton(index, kPrimes[prime_idx % 20]);
    const double u2 = halton(index, kPrimes[(prime_idx + 1) % 20]);
    prime_idx += 2;
    x[dim++] = inv_gauss_from_pair(u1, u2, false);
    if (dim < n) x[dim++] = inv_gauss_from_pair(u1, u2, true);
  }
  double ns = norm(x);
  if (ns < 1e-12) {
    x.assign(n, 0.0);
    x[0] = 1.0;
    ns = 1.0;
  }
  const double u = halton(index, kPrimes[prime_idx % 20]);
  const double f = radius * std::pow(u, 1.0 / static_cast<double>(n)) / ns;
  for (double& v : x) v *= f;
  return x;
}

std::uint64_t halton_offset(std::uint64_t seed) {
  return (splitmix64(seed) % 8191) + 17;
}

}  // namespace smallball
