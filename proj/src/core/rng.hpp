#pragma once

#include <cstdint>
#include <random>

namespace stm {

// Seeded pseudo-random source. All variate transformations are implemented
// here (not via std:: distributions) so that a given seed yields the same
// stream on every compiler and standard library.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t raw() { return eng_(); }

  // uniform on [0,1), 53-bit resolution
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // uniform integer in [0, n)
  uint64_t below(uint64_t n);

  // exact Poisson variate; product method for small means, transformed
  // rejection (Hormann's PTRD) for large ones
  int64_t poisson(double mean);

 private:
  std::mt19937_64 eng_;
};

}  // namespace stm
