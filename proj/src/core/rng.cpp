#include "core/rng.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace stm {

uint64_t Rng::below(uint64_t n) {
  if (n == 0) throw InvalidArgument("Rng::below: n must be positive");
  const uint64_t lim = (0 - n) % n;  // 2^64 mod n
  uint64_t r;
  do {
    r = eng_();
  } while (r < lim);
  return r % n;
}

namespace {

// log(k!) for k = 0..9
constexpr double kLogFact[10] = {
    0.0,
    0.0,
    0.69314718055994531,
    1.79175946922805500,
    3.17805383034794562,
    4.78749174278204599,
    6.57925121201010100,
    8.52516136106541430,
    10.60460290274525023,
    12.80182748008146961};

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

}  // namespace

int64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0)) throw InvalidArgument("Rng::poisson: mean must be >= 0");
  if (mean == 0.0) return 0;

  if (mean < 10.0) {
    // Knuth product method
    const double limit = std::exp(-mean);
    int64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > limit);
    return k - 1;
  }

  // PTRD: transformed rejection with squeeze (Hormann 1993)
  const double smu = std::sqrt(mean);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mu = std::log(mean);

  for (;;) {
    double u;
    double v = uniform01();
    if (v <= 0.86 * v_r) {
      u = v / v_r - 0.43;
      return static_cast<int64_t>(
          std::floor((2.0 * a / (0.5 - std::fabs(u)) + b) * u + mean + 0.445));
    }
    if (v >= v_r) {
      u = uniform01() - 0.5;
    } else {
      u = v / v_r - 0.93;
      u = (u < 0 ? -0.5 : 0.5) - u;
      v = uniform01() * v_r;
    }
    const double us = 0.5 - std::fabs(u);
    if (us < 0.013 && v > us) continue;
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.445);
    if (kf < 0) continue;
    const int64_t k = static_cast<int64_t>(kf);
    v = v * inv_alpha / (a / (us * us) + b);
    if (k >= 10) {
      const double dk = static_cast<double>(k);
      if (std::log(v * smu) <=
          (dk + 0.5) * std::log(mean / dk) - mean - kLogSqrt2Pi + dk -
              (1.0 / 12.0 - 1.0 / (360.0 * dk * dk)) / dk) {
        return k;
      }
    } else {
      if (std::log(v) <= static_cast<double>(k) * log_mu - mean - kLogFact[k]) return k;
    }
  }
}

}  // namespace stm
