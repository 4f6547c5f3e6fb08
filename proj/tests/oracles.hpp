#pragma once

// Reference implementations used only by the tests. Everything here is
// written from the definitions: explicit periodic-image enumeration, linear
// scans, direct sums, and quadrature. None of it shares geometry or search
// code with the library, so agreement is meaningful.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "core/geometry.hpp"
#include "core/matching.hpp"
#include "core/pointset.hpp"

namespace oracle {

// minimum-image displacement by trying the nearby periodic images per axis
inline void displacement(const double* a, const double* b, const stm::Box& box, double* out) {
  for (int i = 0; i < box.dim; ++i) {
    double best = b[i] - a[i];
    if (box.periodic) {
      for (int k = -2; k <= 2; ++k) {
        const double cand = b[i] - a[i] + k * box.side;
        if (cand >= -box.side / 2 && cand < box.side / 2) best = cand;
      }
    }
    out[i] = best;
  }
}

inline double dist2(const double* a, const double* b, const stm::Box& box) {
  double d[stm::kMaxDim];
  oracle::displacement(a, b, box, d);
  double s = 0.0;
  for (int i = 0; i < box.dim; ++i) s += d[i] * d[i];
  return s;
}

inline double dist(const double* a, const double* b, const stm::Box& box) {
  return std::sqrt(oracle::dist2(a, b, box));
}

// strict preference of candidate a (index ia) over b (index ib) as seen from
// z on `side`: closer wins; equal distance falls to the lexicographic rule on
// minimum-image displacements (phi side smaller, psi side greater); exact
// coincidence falls to the lower index
inline bool prefers(const double* z, const double* a, uint32_t ia, const double* b, uint32_t ib,
                    stm::Side side, const stm::Box& box) {
  const double da2 = oracle::dist2(z, a, box);
  const double db2 = oracle::dist2(z, b, box);
  if (da2 != db2) return da2 < db2;
  double da[stm::kMaxDim], db[stm::kMaxDim];
  oracle::displacement(z, a, box, da);
  oracle::displacement(z, b, box, db);
  for (int i = 0; i < box.dim; ++i) {
    if (da[i] != db[i]) return side == stm::Side::phi ? da[i] < db[i] : da[i] > db[i];
  }
  return ia < ib;
}

// linear-scan k-nearest in preference order; `alive` masks points when given
inline std::vector<std::pair<uint32_t, double>> k_nearest(const stm::PointSet& ps, const double* z,
                                                          stm::Side query_side, size_t k,
                                                          const std::vector<char>* alive = nullptr) {
  std::vector<uint32_t> idx;
  for (uint32_t i = 0; i < ps.size(); ++i)
    if (!alive || (*alive)[i]) idx.push_back(i);
  std::sort(idx.begin(), idx.end(), [&](uint32_t a, uint32_t b) {
    return prefers(z, ps.point(a), a, ps.point(b), b, query_side, ps.box());
  });
  if (idx.size() > k) idx.resize(k);
  std::vector<std::pair<uint32_t, double>> out;
  for (uint32_t i : idx) out.emplace_back(i, oracle::dist2(z, ps.point(i), ps.box()));
  return out;
}

// round-parallel mutual nearest neighbour matching, straight from the
// definition: every round pairs reciprocal best live candidates, removes
// them, repeats until one side is exhausted
struct MatchResult {
  std::vector<int64_t> partner_of_phi;
  std::vector<int32_t> round_of_phi;
  size_t matched = 0;
  int32_t rounds = 0;
};

inline MatchResult match(const stm::PointSet& phi, const stm::PointSet& psi) {
  const stm::Box& box = phi.box();
  std::vector<char> phi_live(phi.size(), 1), psi_live(psi.size(), 1);
  MatchResult r;
  r.partner_of_phi.assign(phi.size(), stm::kUnmatched);
  r.round_of_phi.assign(phi.size(), 0);
  size_t nphi = phi.size(), npsi = psi.size();
  for (int32_t round = 1; nphi > 0 && npsi > 0; ++round) {
    // best live candidate on the other side, for every live point
    std::vector<int64_t> best_psi(phi.size(), -1), best_phi(psi.size(), -1);
    for (uint32_t p = 0; p < phi.size(); ++p) {
      if (!phi_live[p]) continue;
      auto h = k_nearest(psi, phi.point(p), stm::Side::phi, 1, &psi_live);
      best_psi[p] = h.empty() ? -1 : h[0].first;
    }
    for (uint32_t x = 0; x < psi.size(); ++x) {
      if (!psi_live[x]) continue;
      auto h = k_nearest(phi, psi.point(x), stm::Side::psi, 1, &phi_live);
      best_phi[x] = h.empty() ? -1 : h[0].first;
    }
    bool any = false;
    for (uint32_t p = 0; p < phi.size(); ++p) {
      const int64_t x = best_psi[p];
      if (x >= 0 && best_phi[static_cast<size_t>(x)] == p) {
        r.partner_of_phi[p] = x;
        r.round_of_phi[p] = round;
        phi_live[p] = 0;
        psi_live[static_cast<size_t>(x)] = 0;
        --nphi;
        --npsi;
        ++r.matched;
        any = true;
        r.rounds = round;
      }
    }
    if (!any) break;  // cannot happen on finite instances, but terminate anyway
  }
  (void)box;
  return r;
}

// ball of the certification region, kept as raw numbers for set comparison
struct OBall {
  double c[stm::kMaxDim];
  double radius;
};

inline bool oball_less(const OBall& a, const OBall& b) {
  for (int i = 0; i < stm::kMaxDim; ++i)
    if (a.c[i] != b.c[i]) return a.c[i] < b.c[i];
  return a.radius < b.radius;
}

inline bool oball_eq(const OBall& a, const OBall& b) {
  return a.c[0] == b.c[0] && a.c[1] == b.c[1] && a.c[2] == b.c[2] && a.radius == b.radius;
}

// certification region by chain enumeration: every chain that competes with
// the anchor's pair contributes the anchor ball of its first step plus one
// ball per subsequent step, centred at the step's head with the step length
// as radius. Reachability over directed steps is explored depth-first with
// linear scans; the resulting ball set is sorted and deduplicated.
inline std::vector<OBall> flower_balls(const stm::Matching& m, stm::Side side, uint32_t index) {
  const stm::PointSet& own = side == stm::Side::phi ? m.phi() : m.psi();
  const stm::PointSet& opp = side == stm::Side::phi ? m.psi() : m.phi();
  const stm::Box& box = own.box();
  const double* zp = own.point(index);
  const int64_t partner =
      side == stm::Side::phi ? m.partner_of_phi(index) : m.partner_of_psi(index);
  std::vector<OBall> balls;
  if (partner == stm::kUnmatched) return balls;  // caller checks sentinel separately
  const uint32_t pidx = static_cast<uint32_t>(partner);
  const double r0_d2 = oracle::dist2(zp, opp.point(pidx), box);

  // directed step (u_side, u, v); visited set keeps the recursion finite
  std::set<std::tuple<int, uint32_t, uint32_t>> seen;

  auto add_ball = [&](const double* c, double radius) {
    OBall b{{0, 0, 0}, radius};
    for (int i = 0; i < box.dim; ++i) b.c[i] = c[i];
    balls.push_back(b);
  };

  auto descend = [&](auto&& self, stm::Side u_side, uint32_t u, uint32_t v, double step_d2) -> void {
    if (!seen.insert({u_side == stm::Side::phi ? 0 : 1, u, v}).second) return;
    const stm::PointSet& uset = u_side == stm::Side::phi ? m.phi() : m.psi();
    const stm::PointSet& vset = u_side == stm::Side::phi ? m.psi() : m.phi();
    const stm::Side v_side = stm::opposite(u_side);
    const double* vp = vset.point(v);
    add_ball(vp, std::sqrt(step_d2));
    for (uint32_t w = 0; w < uset.size(); ++w) {
      const double d2w = oracle::dist2(vp, uset.point(w), box);
      if (d2w > step_d2) continue;
      if (prefers(vp, uset.point(w), w, uset.point(u), u, v_side, box))
        self(self, v_side, v, w, d2w);
    }
  };

  for (uint32_t x = 0; x < opp.size(); ++x) {
    const double d2x = oracle::dist2(zp, opp.point(x), box);
    if (d2x > r0_d2) continue;
    if (x == pidx || prefers(zp, opp.point(x), x, opp.point(pidx), pidx, side, box)) {
      add_ball(zp, std::sqrt(d2x));
      descend(descend, side, index, x, d2x);
    }
  }
  std::sort(balls.begin(), balls.end(), oball_less);
  balls.erase(std::unique(balls.begin(), balls.end(), oball_eq), balls.end());
  return balls;
}

// direct complex-sum scattering at mode m (no recurrences)
inline double scattering_at(const stm::PointSet& ps, const int32_t* mode) {
  const double two_pi_over_L = 2.0 * 3.14159265358979323846 / ps.box().side;
  std::complex<double> acc(0.0, 0.0);
  for (size_t j = 0; j < ps.size(); ++j) {
    double phase = 0.0;
    for (int i = 0; i < ps.dim(); ++i)
      phase += two_pi_over_L * static_cast<double>(mode[i]) * ps.point(j)[i];
    acc += std::complex<double>(std::cos(phase), -std::sin(phase));
  }
  return std::norm(acc) / static_cast<double>(ps.size());
}

// exact count variance over a uniformly random ball centre in 1D: the mean
// uses covered length 2R/L per point and the second moment the pairwise
// overlap of two arcs, max(0, 2R - delta), valid while R < L/4
inline void numvar_1d_exact(const stm::PointSet& ps, double R, double* out_mean,
                            double* out_var) {
  const double L = ps.box().side;
  const size_t n = ps.size();
  const double mean = static_cast<double>(n) * (2.0 * R) / L;
  double m2 = 0.0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      const double delta = oracle::dist(ps.point(i), ps.point(j), ps.box());
      m2 += std::max(0.0, 2.0 * R - delta) / L;
    }
  *out_mean = mean;
  *out_var = m2 - mean * mean;
}

// one-sided lower confidence bound for a binomial proportion
// (Clopper-Pearson): largest p0 with P(X >= k | p0) <= 1 - conf has the
// closed form via the regularized incomplete beta; solved here by bisection
// on the binomial tail evaluated with running products
inline double binom_tail_ge(int64_t n, int64_t k, double p) {
  // P(X >= k), numerically stable enough for the sizes used in tests
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  double logc = 0.0;  // log C(n, i) built incrementally from i = 0
  double acc = 0.0;
  for (int64_t i = 0; i < k; ++i) {
    // accumulate P(X < k) in log space per term
    const double logt = logc + static_cast<double>(i) * std::log(p) +
                        static_cast<double>(n - i) * std::log1p(-p);
    acc += std::exp(logt);
    logc += std::log(static_cast<double>(n - i)) - std::log(static_cast<double>(i + 1));
  }
  return 1.0 - std::min(1.0, acc);
}

inline double clopper_pearson_lower(int64_t k, int64_t n, double conf) {
  if (k <= 0) return 0.0;
  double lo = 0.0, hi = static_cast<double>(k) / static_cast<double>(n);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    // lower bound: smallest p with P(X >= k | p) > 1 - conf fails; keep p
    // where the observed k is still plausible at level 1 - conf
    if (binom_tail_ge(n, k, mid) < 1.0 - conf)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace oracle
