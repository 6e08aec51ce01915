#pragma once

#include <cstdint>

#include "smallball/vec.hpp"

namespace smallball {

// Counter-based deterministic RNG: the state for (seed, stream, index) is a
// pure hash, so sample i is reproducible regardless of evaluation order or
// thread count.
class SampleRng {
 public:
  SampleRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

  double u01();    // uniform in [0, 1)
  double gauss();  // standard normal

 private:
  std::uint64_t next_raw();
  std::uint64_t state_;
  double cached_gauss_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

// Uniform-ish draw from the closed ball of the given radius (gaussian
// direction, radius ~ R * u^(1/n)).
Vec ball_sample(SampleRng& rng, std::size_t n, double radius);

// Uniform draw from the sphere of the given radius.
Vec sphere_sample(SampleRng& rng, std::size_t n, double radius);

// Van der Corput radical inverse in the given base.
double halton(std::uint64_t index, int base);

// Low-discrepancy point in the ball: Halton directions (Box-Muller over
// consecutive prime bases) with a Halton radius coordinate. `index` should
// start at seed-derived offset >= 1.
Vec halton_ball_point(std::uint64_t index, std::size_t n, double radius);

// Seed-derived starting index for Halton scans.
std::uint64_t halton_offset(std::uint64_t seed);

}  // namespace smallball
