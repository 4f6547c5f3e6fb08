#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "core/pointset.hpp"
#include "core/rng.hpp"

namespace stm {

enum class ShiftMode : uint8_t {
  deterministic,  // offset 0
  fixed,          // caller-supplied offset in [0,1)^d
  stationary      // offset drawn uniformly from the seed
};

struct LatticeSpec {
  int dim = 1;
  int64_t side = 1;  // integer so the lattice tiles the torus
  ShiftMode mode = ShiftMode::deterministic;
  std::array<double, kMaxDim> offset{0.0, 0.0, 0.0};
  uint64_t seed = 0;
};

// Integer lattice (optionally shifted by a common offset) on the torus.
// Point order is lexicographic in the integer coordinates, axis 0 slowest.
PointSet make_lattice(const LatticeSpec& spec);

// Homogeneous Poisson sample of intensity alpha on [0, side)^dim.
PointSet sample_poisson(int dim, double side, double alpha, uint64_t seed);

// Stationary determinantal model with a power-exponential spectral density
//   f(k) = amplitude * exp(-|scale * k|^shape),
// discretised on the torus wave vectors k = 2*pi*m/side. `scale` is chosen as
// scale_fraction times the largest value keeping the amplitude at or below 1,
// which pins amplitude = scale_fraction^dim.
struct SpectralModel {
  int dim;
  double side;
  double alpha;
  double shape;
  double scale_fraction;
  double amplitude;
  double scale;
  int trunc;                   // modes kept per axis: |m_i| <= trunc
  std::vector<int32_t> modes;  // flattened, dim entries per mode
  std::vector<double> eigen;   // eigenvalue per mode, in [0,1]
  double eigen_sum;            // expected point count

  size_t mode_count() const { return eigen.size(); }
};

// trunc == 0 selects the truncation automatically so the discarded spectral
// mass is below 1e-3 of the total.
SpectralModel make_spectral_model(int dim, double side, double alpha, double shape,
                                  double scale_fraction, int trunc = 0);

// Draw one sample: Bernoulli selection of modes by eigenvalue, then sequential
// projection sampling with uniform proposals (exact, no discretisation).
PointSet sample_dpp(const SpectralModel& model, uint64_t seed);

}  // namespace stm
