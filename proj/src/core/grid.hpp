#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "core/pointset.hpp"

namespace stm {

struct Hit {
  uint32_t idx;
  double d2;
};

// Uniform bucket grid over a PointSet with an optional liveness mask.
// Cell side is close to the mean nearest-neighbour spacing, so queries touch
// O(1) cells on near-uniform data. All query tie-breaking goes through the
// side-dependent preference order, falling back to point index, so results
// are deterministic even on exactly symmetric configurations.
class NeighborIndex {
 public:
  // cells_per_axis == 0 sizes cells near the mean spacing; an explicit value
  // overrides it (coarser grids suit bulk counting queries)
  explicit NeighborIndex(const PointSet& ps, int cells_per_axis = 0);

  const PointSet& points() const { return *ps_; }

  bool alive(uint32_t i) const { return alive_[i] != 0; }
  size_t alive_count() const { return alive_count_; }
  void set_dead(uint32_t i);

  // Re-bucket live points only; called when the live set has thinned enough
  // that the original cell size no longer matches the density.
  void rebuild();
  bool should_rebuild() const { return alive_count_ * 2 < built_count_ && built_count_ > 16; }

  // Best live point for a query of side `query_side`; false when none live.
  bool nearest(const double* z, Side query_side, uint32_t& out_idx, double& out_d2) const;

  // k best live points in preference order (may return fewer than k).
  std::vector<Hit> k_nearest(const double* z, Side query_side, size_t k) const;

  // Visit every live point with squared distance at most d2_max from z. The
  // threshold is an exact double comparison so points at exactly the tie
  // distance stay inside the result set.
  template <typename F>
  void for_each_within(const double* z, double d2_max, F&& f) const;

 private:
  const PointSet* ps_;
  std::vector<uint32_t> starts_;
  std::vector<uint32_t> ids_;
  std::vector<char> alive_;
  size_t alive_count_ = 0;
  size_t built_count_ = 0;
  int m_ = 1;          // cells per axis
  int m_override_ = 0;
  double cell_ = 1.0;  // cell side
  double inv_cell_ = 1.0;
  // periodic grids span [0, side); free-space grids span the data bounds
  double origin_[kMaxDim] = {0.0, 0.0, 0.0};

  void build();
  int cell_coord(int axis, double x) const;
  size_t cell_id(const int c[kMaxDim]) const;

  template <typename F>
  void scan_cell(size_t cid, F&& f) const;

  // call f(offset[]) for every cell offset with Chebyshev norm exactly `ring`
  // inside per-axis residue bounds lo/hi; offsets are unique cells
  template <typename F>
  static void for_ring(int dim, int ring, const int lo[kMaxDim], const int hi[kMaxDim], F&& f);

  friend class RingCursor;
};

// ---- inline/template bits ----

template <typename F>
void NeighborIndex::scan_cell(size_t cid, F&& f) const {
  const uint32_t b = starts_[cid], e = starts_[cid + 1];
  for (uint32_t t = b; t < e; ++t) f(ids_[t]);
}

template <typename F>
void NeighborIndex::for_ring(int dim, int ring, const int lo[kMaxDim], const int hi[kMaxDim],
                             F&& f) {
  int o[kMaxDim] = {0, 0, 0};
  if (ring == 0) {
    for (int i = 0; i < dim; ++i)
      if (0 < lo[i] || 0 > hi[i]) return;
    f(o);
    return;
  }
  for (int axis = 0; axis < dim; ++axis) {
    for (int s = -1; s <= 1; s += 2) {
      const int oa = s * ring;
      if (oa < lo[axis] || oa > hi[axis]) continue;
      o[axis] = oa;
      // axes before `axis` stay strictly inside the ring to avoid duplicates
      int fb[kMaxDim][2];
      int free_axes[kMaxDim];
      int nfree = 0;
      bool feasible = true;
      for (int k = 0; k < dim; ++k) {
        if (k == axis) continue;
        const int flo = std::max(lo[k], k < axis ? -ring + 1 : -ring);
        const int fhi = std::min(hi[k], k < axis ? ring - 1 : ring);
        if (flo > fhi) {
          feasible = false;
          break;
        }
        fb[nfree][0] = flo;
        fb[nfree][1] = fhi;
        free_axes[nfree] = k;
        ++nfree;
      }
      if (!feasible) continue;
      if (nfree == 0) {
        f(o);
      } else if (nfree == 1) {
        for (int a = fb[0][0]; a <= fb[0][1]; ++a) {
          o[free_axes[0]] = a;
          f(o);
        }
      } else {
        for (int a = fb[0][0]; a <= fb[0][1]; ++a) {
          o[free_axes[0]] = a;
          for (int b = fb[1][0]; b <= fb[1][1]; ++b) {
            o[free_axes[1]] = b;
            f(o);
          }
        }
      }
      for (int k = 0; k < dim; ++k)
        if (k != axis) o[k] = 0;
    }
    o[axis] = 0;
    // both signs coincide when ring == 0 only; ring >= 1 here, but an axis
    // where -ring == ring cannot happen, so no dedup needed across signs
  }
}

template <typename F>
void NeighborIndex::for_each_within(const double* z, double d2_max, F&& f) const {
  if (ids_.empty()) return;
  const Box& box = ps_->box();
  const double r_pad = std::sqrt(d2_max) * (1.0 + 1e-12);
  int rlo[kMaxDim], rhi[kMaxDim];
  for (int i = 0; i < box.dim; ++i) {
    int lo = static_cast<int>(std::floor((z[i] - r_pad - origin_[i]) * inv_cell_));
    int hi = static_cast<int>(std::floor((z[i] + r_pad - origin_[i]) * inv_cell_));
    if (box.periodic) {
      if (hi - lo + 1 >= m_) {
        lo = 0;
        hi = m_ - 1;
      }
    } else {
      lo = std::max(lo, 0);
      hi = std::min(hi, m_ - 1);
    }
    rlo[i] = lo;
    rhi[i] = hi;
  }
  int c[kMaxDim] = {0, 0, 0};
  const int dim = box.dim;
  auto visit = [&](const int cc[kMaxDim]) {
    int w[kMaxDim];
    for (int i = 0; i < dim; ++i) {
      w[i] = cc[i] % m_;
      if (w[i] < 0) w[i] += m_;
    }
    scan_cell(cell_id(w), [&](uint32_t id) {
      if (!alive_[id]) return;
      const double d2 = dist2(z, ps_->point(id), box);
      if (d2 <= d2_max) f(id, d2);
    });
  };
  for (c[0] = rlo[0]; c[0] <= rhi[0]; ++c[0]) {
    if (dim == 1) {
      visit(c);
      continue;
    }
    for (c[1] = rlo[1]; c[1] <= rhi[1]; ++c[1]) {
      if (dim == 2) {
        visit(c);
        continue;
      }
      for (c[2] = rlo[2]; c[2] <= rhi[2]; ++c[2]) visit(c);
    }
  }
}

}  // namespace stm
