#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace stm {

constexpr int kMaxDim = 3;

inline double unit_ball_volume(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 3.14159265358979323846;
    case 3: return 4.18879020478639098462;  // 4*pi/3
    default: return 0.0;
  }
}

// Axis-aligned cube [0,side)^dim, optionally with periodic (torus) metric.
struct Box {
  int dim = 1;
  double side = 1.0;
  bool periodic = true;

  bool same_as(const Box& o) const {
    return dim == o.dim && side == o.side && periodic == o.periodic;
  }
};

// Map a coordinate difference to its minimum-image representative in
// [-side/2, side/2).
inline double wrap_delta(double t, double side) {
  return t - side * std::floor(t / side + 0.5);
}

inline void displacement(const double* a, const double* b, const Box& box, double* out) {
  if (box.periodic) {
    for (int i = 0; i < box.dim; ++i) out[i] = wrap_delta(b[i] - a[i], box.side);
  } else {
    for (int i = 0; i < box.dim; ++i) out[i] = b[i] - a[i];
  }
}

inline double dist2(const double* a, const double* b, const Box& box) {
  double s = 0.0;
  if (box.periodic) {
    for (int i = 0; i < box.dim; ++i) {
      const double t = wrap_delta(b[i] - a[i], box.side);
      s += t * t;
    }
  } else {
    for (int i = 0; i < box.dim; ++i) {
      const double t = b[i] - a[i];
      s += t * t;
    }
  }
  return s;
}

inline double dist(const double* a, const double* b, const Box& box) {
  return std::sqrt(dist2(a, b, box));
}

enum class Side : uint8_t { phi = 0, psi = 1 };

inline Side opposite(Side s) { return s == Side::phi ? Side::psi : Side::phi; }

// Which way a lexicographic tie falls depends on the side doing the
// comparing: lattice points break distance ties toward the lexicographically
// smaller displacement, sampled points toward the larger one. Comparisons use
// minimum-image displacements so the rule is invariant under torus shifts.
//
// Returns -1 if the displacement da is preferred over db by `side`,
// +1 for the reverse, 0 if the displacements are componentwise equal.
inline int compare_tie(const double* da, const double* db, int dim, Side side) {
  for (int i = 0; i < dim; ++i) {
    if (da[i] < db[i]) return side == Side::phi ? -1 : +1;
    if (da[i] > db[i]) return side == Side::phi ? +1 : -1;
  }
  return 0;
}

// Strict preference of candidate a over candidate b as a partner for z, where
// z lives on `side`. Distance decides; exact ties fall to the lexicographic
// rule above. Coincident candidates are not ordered here (see prefers_idx).
bool prefers(const double* z, const double* a, const double* b, Side side, const Box& box);

// Total order: like prefers, but breaks exact coincidences by point index
// (lower index wins). ia, ib index the candidates on the side opposite to z.
bool prefers_idx(const double* z, const double* a, uint32_t ia, const double* b, uint32_t ib,
                 Side side, const Box& box);

}  // namespace stm
