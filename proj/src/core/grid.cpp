#include "core/grid.hpp"

#include "core/errors.hpp"

namespace stm {

NeighborIndex::NeighborIndex(const PointSet& ps, int cells_per_axis)
    : ps_(&ps), m_override_(cells_per_axis) {
  alive_.assign(ps.size(), 1);
  alive_count_ = ps.size();
  build();
}

void NeighborIndex::set_dead(uint32_t i) {
  if (alive_[i]) {
    alive_[i] = 0;
    --alive_count_;
  }
}

void NeighborIndex::rebuild() { build(); }

int NeighborIndex::cell_coord(int axis, double x) const {
  const Box& box = ps_->box();
  if (box.periodic) {
    x -= box.side * std::floor(x / box.side);
  }
  int c = static_cast<int>((x - origin_[axis]) * inv_cell_);
  if (c >= m_) c = m_ - 1;
  if (c < 0) c = 0;
  return c;
}

size_t NeighborIndex::cell_id(const int c[kMaxDim]) const {
  size_t id = 0;
  for (int i = 0; i < ps_->dim(); ++i) id = id * static_cast<size_t>(m_) + static_cast<size_t>(c[i]);
  return id;
}

void NeighborIndex::build() {
  const int d = ps_->dim();
  const Box& box = ps_->box();
  built_count_ = alive_count_;

  double span = box.side;
  if (box.periodic) {
    for (int i = 0; i < d; ++i) origin_[i] = 0.0;
  } else {
    // free-space coordinates are unconstrained: grid over the data bounds
    double lo[kMaxDim], hi[kMaxDim];
    for (int i = 0; i < d; ++i) {
      lo[i] = 0.0;
      hi[i] = box.side;
    }
    bool first = true;
    for (size_t p = 0; p < ps_->size(); ++p) {
      if (!alive_[p]) continue;
      const double* pt = ps_->point(p);
      for (int i = 0; i < d; ++i) {
        if (first || pt[i] < lo[i]) lo[i] = pt[i];
        if (first || pt[i] > hi[i]) hi[i] = pt[i];
      }
      first = false;
    }
    if (first) {
      for (int i = 0; i < d; ++i) {
        lo[i] = 0.0;
        hi[i] = box.side;
      }
    }
    span = 0.0;
    for (int i = 0; i < d; ++i) {
      origin_[i] = lo[i];
      span = std::max(span, hi[i] - lo[i]);
    }
    if (!(span > 0.0)) span = 1.0;
    span *= 1.0 + 1e-12;  // keep the max coordinate inside the last cell
  }

  const double n = std::max<double>(1.0, static_cast<double>(alive_count_));
  m_ = m_override_ > 0 ? m_override_
                       : std::max(1, static_cast<int>(std::floor(std::pow(n, 1.0 / d) + 1e-9)));
  cell_ = span / m_;
  inv_cell_ = 1.0 / cell_;
  size_t ncells = 1;
  for (int i = 0; i < d; ++i) ncells *= static_cast<size_t>(m_);

  starts_.assign(ncells + 1, 0);
  const size_t total = ps_->size();
  std::vector<uint32_t> cid(total, 0);
  for (size_t i = 0; i < total; ++i) {
    if (!alive_[i]) continue;
    int c[kMaxDim];
    const double* p = ps_->point(i);
    for (int k = 0; k < d; ++k) c[k] = cell_coord(k, p[k]);
    cid[i] = static_cast<uint32_t>(cell_id(c));
    ++starts_[cid[i] + 1];
  }
  for (size_t c = 0; c < ncells; ++c) starts_[c + 1] += starts_[c];
  ids_.resize(alive_count_);
  std::vector<uint32_t> cursor(starts_.begin(), starts_.end() - 1);
  for (size_t i = 0; i < total; ++i) {
    if (!alive_[i]) continue;
    ids_[cursor[cid[i]]++] = static_cast<uint32_t>(i);
  }
}

namespace {

struct AxisBounds {
  int lo[kMaxDim];
  int hi[kMaxDim];
  int max_ring;
};

AxisBounds residue_bounds(const Box& box, const int c0[kMaxDim], int m) {
  AxisBounds b{};
  b.max_ring = 0;
  for (int i = 0; i < box.dim; ++i) {
    if (box.periodic) {
      b.lo[i] = -(m / 2);
      b.hi[i] = m - 1 - m / 2;
    } else {
      b.lo[i] = -c0[i];
      b.hi[i] = m - 1 - c0[i];
    }
    b.max_ring = std::max(b.max_ring, std::max(-b.lo[i], b.hi[i]));
  }
  return b;
}

}  // namespace

bool NeighborIndex::nearest(const double* z, Side query_side, uint32_t& out_idx,
                            double& out_d2) const {
  if (alive_count_ == 0) return false;
  const Box& box = ps_->box();
  const int d = box.dim;
  int c0[kMaxDim] = {0, 0, 0};
  for (int i = 0; i < d; ++i) c0[i] = cell_coord(i, z[i]);
  const AxisBounds ab = residue_bounds(box, c0, m_);

  bool have = false;
  uint32_t best = 0;
  double best_d2 = 0.0;
  for (int r = 0; r <= ab.max_ring; ++r) {
    if (have && r >= 1) {
      const double bound = (r - 1) * cell_;
      if (best_d2 < bound * bound) break;
    }
    for_ring(d, r, ab.lo, ab.hi, [&](const int o[kMaxDim]) {
      int w[kMaxDim];
      for (int i = 0; i < d; ++i) {
        w[i] = c0[i] + o[i];
        if (box.periodic) {
          if (w[i] < 0) w[i] += m_;
          if (w[i] >= m_) w[i] -= m_;
        }
      }
      scan_cell(cell_id(w), [&](uint32_t id) {
        if (!alive_[id]) return;
        const double d2v = dist2(z, ps_->point(id), box);
        if (!have || d2v < best_d2 ||
            (d2v == best_d2 &&
             prefers_idx(z, ps_->point(id), id, ps_->point(best), best, query_side, box))) {
          have = true;
          best = id;
          best_d2 = d2v;
        }
      });
    });
  }
  if (!have) return false;
  out_idx = best;
  out_d2 = best_d2;
  return true;
}

std::vector<Hit> NeighborIndex::k_nearest(const double* z, Side query_side, size_t k) const {
  std::vector<Hit> out;
  if (k == 0 || alive_count_ == 0) return out;
  const Box& box = ps_->box();
  const int d = box.dim;
  int c0[kMaxDim] = {0, 0, 0};
  for (int i = 0; i < d; ++i) c0[i] = cell_coord(i, z[i]);
  const AxisBounds ab = residue_bounds(box, c0, m_);

  auto preferred = [&](const Hit& a, const Hit& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    return prefers_idx(z, ps_->point(a.idx), a.idx, ps_->point(b.idx), b.idx, query_side, box);
  };

  for (int r = 0; r <= ab.max_ring; ++r) {
    if (out.size() == k && r >= 1) {
      const double bound = (r - 1) * cell_;
      if (out.back().d2 < bound * bound) break;
    }
    for_ring(d, r, ab.lo, ab.hi, [&](const int o[kMaxDim]) {
      int w[kMaxDim];
      for (int i = 0; i < d; ++i) {
        w[i] = c0[i] + o[i];
        if (box.periodic) {
          if (w[i] < 0) w[i] += m_;
          if (w[i] >= m_) w[i] -= m_;
        }
      }
      scan_cell(cell_id(w), [&](uint32_t id) {
        if (!alive_[id]) return;
        const Hit h{id, dist2(z, ps_->point(id), box)};
        if (out.size() == k && !preferred(h, out.back())) return;
        auto pos = std::upper_bound(out.begin(), out.end(), h, preferred);
        out.insert(pos, h);
        if (out.size() > k) out.pop_back();
      });
    });
  }
  return out;
}

}  // namespace stm
