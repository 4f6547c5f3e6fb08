#include "core/flower.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <limits>
#include <unordered_set>

#include "core/errors.hpp"

namespace stm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Ball make_ball(const double* c, double radius, int dim) {
  Ball b;
  for (int i = 0; i < dim; ++i) b.center[static_cast<size_t>(i)] = c[i];
  b.radius = radius;
  return b;
}

bool ball_less(const Ball& a, const Ball& b) {
  for (int i = 0; i < kMaxDim; ++i) {
    if (a.center[static_cast<size_t>(i)] != b.center[static_cast<size_t>(i)])
      return a.center[static_cast<size_t>(i)] < b.center[static_cast<size_t>(i)];
  }
  return a.radius < b.radius;
}

bool ball_eq(const Ball& a, const Ball& b) {
  return a.center == b.center && a.radius == b.radius;
}

}  // namespace

bool Flower::intersects_ball(const double* center, double radius, const Box& box) const {
  if (sentinel) return true;
  for (const Ball& b : balls) {
    if (dist(b.center.data(), center, box) <= b.radius + radius) return true;
  }
  return false;
}

bool Flower::inside_box(const double* lo, const double* hi, int dim) const {
  if (sentinel) return false;
  for (const Ball& b : balls) {
    for (int i = 0; i < dim; ++i) {
      if (b.center[static_cast<size_t>(i)] - b.radius < lo[i]) return false;
      if (b.center[static_cast<size_t>(i)] + b.radius > hi[i]) return false;
    }
  }
  return true;
}

void Flower::write_csv(const std::string& path, const Box& box) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open for writing: " + path);
  std::fprintf(f, "# flower d=%d L=%.17g anchor_side=%s anchor_index=%u partner_index=%lld "
                  "sentinel=%d bounding_radius=%.17g n_balls=%zu\n",
               box.dim, box.side, anchor_side == Side::phi ? "phi" : "psi", anchor_index,
               static_cast<long long>(partner_index), sentinel ? 1 : 0, bounding_radius,
               balls.size());
  std::fprintf(f, "# anchor=");
  for (int i = 0; i < box.dim; ++i)
    std::fprintf(f, i ? ",%.17g" : "%.17g", anchor[static_cast<size_t>(i)]);
  std::fputc('\n', f);
  if (partner_index >= 0) {
    std::fprintf(f, "# partner=");
    for (int i = 0; i < box.dim; ++i)
      std::fprintf(f, i ? ",%.17g" : "%.17g", partner[static_cast<size_t>(i)]);
    std::fputc('\n', f);
  }
  std::fprintf(f, "# center_1..center_d,radius\n");
  for (const Ball& b : balls) {
    for (int i = 0; i < box.dim; ++i)
      std::fprintf(f, "%.17g,", b.center[static_cast<size_t>(i)]);
    std::fprintf(f, "%.17g\n", b.radius);
  }
  if (std::fclose(f) != 0) throw IoError("write failed: " + path);
}

FlowerEngine::FlowerEngine(const Matching& m) : m_(&m), gphi_(m.phi()), gpsi_(m.psi()) {}

Flower FlowerEngine::flower(Side side, uint32_t index, uint64_t budget) const {
  const PointSet& own = side == Side::phi ? m_->phi() : m_->psi();
  const PointSet& opp = side == Side::phi ? m_->psi() : m_->phi();
  if (index >= own.size()) throw InvalidArgument("flower: anchor index out of range");
  const Box& box = own.box();

  Flower f;
  f.anchor_side = side;
  f.anchor_index = index;
  const double* zp = own.point(index);
  for (int i = 0; i < box.dim; ++i) f.anchor[static_cast<size_t>(i)] = zp[i];

  const int64_t partner =
      side == Side::phi ? m_->partner_of_phi(index) : m_->partner_of_psi(index);
  if (partner == kUnmatched) {
    f.sentinel = true;
    f.bounding_radius = kInf;
    return f;
  }
  const uint32_t pidx = static_cast<uint32_t>(partner);
  const double* tp = opp.point(pidx);
  f.partner_index = partner;
  for (int i = 0; i < box.dim; ++i) f.partner[static_cast<size_t>(i)] = tp[i];
  const double r0_d2 = dist2(zp, tp, box);

  struct Edge {
    uint32_t u, v;   // directed step u -> v; v is on the opposite side of u
    Side u_side;
    double d2;       // squared step length
  };
  auto edge_key = [](Side us, uint32_t u, uint32_t v) {
    return (static_cast<uint64_t>(u) << 33) | (static_cast<uint64_t>(v) << 2) |
           (us == Side::psi ? 1u : 0u);
  };

  std::unordered_set<uint64_t> seen;
  std::deque<Edge> queue;
  auto push_edge = [&](Side us, uint32_t u, uint32_t v, double d2uv) {
    if (seen.insert(edge_key(us, u, v)).second) queue.push_back({u, v, us, d2uv});
  };

  // chains compete with the pair (z, partner) when their first member is the
  // partner itself or preferred over it by z
  const NeighborIndex& opp_grid = side == Side::phi ? gpsi_ : gphi_;
  opp_grid.for_each_within(zp, r0_d2, [&](uint32_t xid, double d2x) {
    if (xid == pidx || prefers_idx(zp, opp.point(xid), xid, tp, pidx, side, box)) {
      f.balls.push_back(make_ball(zp, std::sqrt(d2x), box.dim));  // chain start ball
      push_edge(side, index, xid, d2x);
    }
  });

  uint64_t expanded = 0;
  while (!queue.empty()) {
    const Edge e = queue.front();
    queue.pop_front();
    if (++expanded > budget) throw BudgetExhausted("matching_flower: node budget exhausted");

    const Side v_side = opposite(e.u_side);
    const PointSet& vset = v_side == Side::phi ? m_->phi() : m_->psi();
    const PointSet& wset = e.u_side == Side::phi ? m_->phi() : m_->psi();
    const NeighborIndex& wgrid = e.u_side == Side::phi ? gphi_ : gpsi_;
    const double* vp = vset.point(e.v);
    const double* up = wset.point(e.u);
    f.balls.push_back(make_ball(vp, std::sqrt(e.d2), box.dim));

    // descend: w on u's side that v strictly prefers over u
    wgrid.for_each_within(vp, e.d2, [&](uint32_t wid, double d2w) {
      if (prefers_idx(vp, wset.point(wid), wid, up, e.u, v_side, box))
        push_edge(v_side, e.v, wid, d2w);
    });
  }

  std::sort(f.balls.begin(), f.balls.end(), ball_less);
  f.balls.erase(std::unique(f.balls.begin(), f.balls.end(), ball_eq), f.balls.end());
  f.bounding_radius = 0.0;
  for (const Ball& b : f.balls) {
    f.bounding_radius =
        std::max(f.bounding_radius, dist(b.center.data(), zp, box) + b.radius);
  }
  return f;
}

Flower matching_flower(const Matching& m, Side side, uint32_t index, uint64_t budget) {
  FlowerEngine eng(m);
  return eng.flower(side, index, budget);
}

// ---- descending chains ----

ChainSearch descending_chains(const PointSet& phi, const PointSet& psi, Side start_side,
                              uint32_t start, double b, int n, uint64_t budget, bool collect,
                              bool exists_only) {
  if (!phi.box().same_as(psi.box()))
    throw InvalidArgument("descending_chains: mismatched boxes");
  if (n < 1) throw InvalidArgument("descending_chains: n must be >= 1");
  if (!(b >= 0.0)) throw InvalidArgument("descending_chains: b must be >= 0");
  const PointSet& own = start_side == Side::phi ? phi : psi;
  if (start >= own.size()) throw InvalidArgument("descending_chains: start index out of range");

  const Box& box = phi.box();
  NeighborIndex gphi(phi), gpsi(psi);
  const size_t target_len = 2 * static_cast<size_t>(n) + 1;

  ChainSearch res;
  std::vector<uint32_t> path;
  path.reserve(target_len);
  path.push_back(start);
  uint64_t visited = 0;

  // returns true to stop the whole search (exists_only hit)
  auto dfs = [&](auto&& self, Side cur_side, uint32_t cur, uint32_t prev, double step_d2) -> bool {
    if (++visited > budget) throw BudgetExhausted("descending_chains: node budget exhausted");
    if (path.size() == target_len) {
      ++res.count;
      if (collect) res.chains.push_back({start_side, path});
      return exists_only;
    }
    const Side next_side = opposite(cur_side);
    const PointSet& nset = next_side == Side::phi ? phi : psi;
    const NeighborIndex& ngrid = next_side == Side::phi ? gphi : gpsi;
    const PointSet& pset = next_side == Side::phi ? phi : psi;  // prev is on next's side
    const double* cp = (cur_side == Side::phi ? phi : psi).point(cur);
    const double* pp = pset.point(prev);

    bool stop = false;
    ngrid.for_each_within(cp, step_d2, [&](uint32_t wid, double d2w) {
      if (stop) return;
      if (!prefers_idx(cp, nset.point(wid), wid, pp, prev, cur_side, box)) return;
      path.push_back(wid);
      stop = self(self, next_side, wid, cur, d2w);
      path.pop_back();
    });
    return stop;
  };

  const double* sp = own.point(start);
  const Side second_side = opposite(start_side);
  const NeighborIndex& sgrid = second_side == Side::phi ? gphi : gpsi;
  bool stop = false;
  sgrid.for_each_within(sp, b * b, [&](uint32_t wid, double d2w) {
    if (stop) return;
    path.push_back(wid);
    stop = dfs(dfs, second_side, wid, start, d2w);
    path.pop_back();
  });
  return res;
}

// ---- stopping sets and decisiveness ----

namespace {

std::shared_ptr<PointSet> clip_to_box(const PointSet& ps, const double* lo, const double* hi) {
  std::vector<char> keep(ps.size(), 0);
  for (size_t i = 0; i < ps.size(); ++i) {
    const double* p = ps.point(i);
    bool in = true;
    for (int k = 0; k < ps.dim(); ++k)
      if (p[k] < lo[k] || p[k] > hi[k]) in = false;
    keep[i] = in;
  }
  return std::make_shared<PointSet>(ps.filtered(keep));
}

bool same_coords(const double* a, const double* b, int dim) {
  for (int i = 0; i < dim; ++i)
    if (a[i] != b[i]) return false;
  return true;
}

}  // namespace

bool verify_stopping_set(const PointSet& phi, const PointSet& psi, const double* z,
                         const double* lo, const double* hi, uint64_t budget) {
  if (phi.box().periodic)
    throw InvalidArgument("verify_stopping_set: free-space boxes only");
  if (!phi.box().same_as(psi.box()))
    throw InvalidArgument("verify_stopping_set: mismatched boxes");
  const int d = phi.dim();
  for (int i = 0; i < d; ++i)
    if (z[i] < lo[i] || z[i] > hi[i])
      throw InvalidArgument("verify_stopping_set: anchor outside the window");

  // the instance rooted at z: add z to the lattice side unless already there
  size_t anchor = phi.size();
  for (size_t i = 0; i < phi.size(); ++i) {
    if (same_coords(phi.point(i), z, d)) {
      anchor = i;
      break;
    }
  }
  auto phi_z = std::make_shared<PointSet>(anchor == phi.size() ? phi.with_point(z) : phi);
  auto psi_p = std::make_shared<PointSet>(psi);

  const Matching m_full = stable_match(phi_z, psi_p);
  const Flower f_full = matching_flower(m_full, Side::phi, static_cast<uint32_t>(anchor), budget);

  auto phi_w = clip_to_box(*phi_z, lo, hi);
  auto psi_w = clip_to_box(*psi_p, lo, hi);
  size_t anchor_w = 0;
  {
    bool found = false;
    for (size_t i = 0; i < phi_w->size(); ++i) {
      if (same_coords(phi_w->point(i), z, d)) {
        anchor_w = i;
        found = true;
        break;
      }
    }
    if (!found) throw InvalidArgument("verify_stopping_set: anchor lost in clipping");
  }
  const Matching m_w = stable_match(phi_w, psi_w);
  const Flower f_w = matching_flower(m_w, Side::phi, static_cast<uint32_t>(anchor_w), budget);

  const bool in_full = f_full.inside_box(lo, hi, d);
  const bool in_w = f_w.inside_box(lo, hi, d);
  if (in_full != in_w) return false;
  if (in_full) {
    const int64_t pf = m_full.partner_of_phi(anchor);
    const int64_t pw = m_w.partner_of_phi(anchor_w);
    if (pf == kUnmatched || pw == kUnmatched) return pf == pw;
    return same_coords(m_full.psi().point(static_cast<size_t>(pf)),
                       m_w.psi().point(static_cast<size_t>(pw)), d);
  }
  return true;
}

bool is_decisive(const double* lo, const double* hi, int dim, const double* q,
                 const PointSet& psi, uint64_t budget) {
  if (psi.box().periodic) throw InvalidArgument("is_decisive: free-space boxes only");
  if (psi.dim() != dim) throw InvalidArgument("is_decisive: dimension mismatch");
  int64_t base[kMaxDim], count[kMaxDim];
  size_t n = 1;
  for (int i = 0; i < dim; ++i) {
    base[i] = static_cast<int64_t>(std::ceil(lo[i]));
    const int64_t top = static_cast<int64_t>(std::floor(hi[i]));
    if (top < base[i]) throw InvalidArgument("is_decisive: cube contains no lattice points");
    count[i] = top - base[i] + 1;
    n *= static_cast<size_t>(count[i]);
    if (q[i] != std::floor(q[i]) || q[i] < lo[i] || q[i] > hi[i])
      throw InvalidArgument("is_decisive: q must be a lattice point inside the cube");
  }

  std::vector<double> coords;
  coords.reserve(n * static_cast<size_t>(dim));
  size_t anchor = 0;
  for (size_t flat = 0; flat < n; ++flat) {
    size_t rem = flat;
    int64_t g[kMaxDim];
    for (int i = dim - 1; i >= 0; --i) {
      g[i] = base[i] + static_cast<int64_t>(rem % static_cast<size_t>(count[i]));
      rem /= static_cast<size_t>(count[i]);
    }
    bool is_q = true;
    for (int i = 0; i < dim; ++i) {
      coords.push_back(static_cast<double>(g[i]));
      if (static_cast<double>(g[i]) != q[i]) is_q = false;
    }
    if (is_q) anchor = flat;
  }
  auto phi_cube = std::make_shared<PointSet>(psi.box(), std::move(coords), PointLabel::lattice,
                                             psi.seed());
  auto psi_cube = clip_to_box(psi, lo, hi);
  const Matching m = stable_match(phi_cube, psi_cube);
  const Flower f = matching_flower(m, Side::phi, static_cast<uint32_t>(anchor), budget);
  return f.inside_box(lo, hi, dim);
}

// ---- rigidity ----

RigidityRecord rigidity_recover(const Matching& m, const double* center, double radius,
                                uint64_t budget) {
  const PointSet& phi = m.phi();
  const PointSet& psi = m.psi();
  const Box& box = phi.box();
  if (!box.periodic) throw InvalidArgument("rigidity_recover: torus instances only");
  if (!(radius > 0.0) || radius >= box.side / 2)
    throw InvalidArgument("rigidity_recover: radius must lie in (0, side/2)");
  if (m.matched_count() != phi.size())
    throw InvalidArgument("rigidity_recover: every lattice point must be matched");

  RigidityRecord rec;
  for (int i = 0; i < box.dim; ++i) rec.center[static_cast<size_t>(i)] = center[i];
  rec.radius = radius;

  // survivors: matched samples strictly outside the closed ball A
  std::vector<char> keep(psi.size(), 0);
  for (size_t x = 0; x < psi.size(); ++x) {
    if (m.partner_of_psi(x) == kUnmatched) continue;
    if (dist(psi.point(x), center, box) <= radius) {
      ++rec.truth;
    } else {
      keep[x] = 1;
    }
  }
  auto survivors = std::make_shared<PointSet>(psi.filtered(keep));
  const Matching m2 = stable_match(m.phi_ptr(), survivors);
  FlowerEngine eng(m2);

  auto flag_inconclusive = [&](const std::string& why) {
    rec.conclusive = false;
    rec.reason = why;
  };

  for (uint32_t p = 0; p < phi.size(); ++p) {
    if (dist(phi.point(p), center, box) <= radius) {
      ++rec.lattice_in;
      continue;
    }
    if (m2.partner_of_phi(p) == kUnmatched) {
      ++rec.undecided_out;  // sentinel flower reaches everywhere
      continue;
    }
    Flower f;
    try {
      f = eng.flower(Side::phi, p, budget);
    } catch (const BudgetExhausted&) {
      flag_inconclusive("flower budget exhausted");
      return rec;
    }
    if (f.bounding_radius >= box.side / 2) {
      flag_inconclusive("flower wraps more than half the torus");
      return rec;
    }
    if (f.intersects_ball(center, radius, box)) ++rec.undecided_out;
  }

  for (uint32_t x = 0; x < survivors->size(); ++x) {
    Flower f;
    try {
      f = eng.flower(Side::psi, x, budget);
    } catch (const BudgetExhausted&) {
      flag_inconclusive("flower budget exhausted");
      return rec;
    }
    if (f.sentinel) {
      // a surviving sample the re-matching left out: cannot certify anything
      flag_inconclusive("surviving sample unmatched after deletion");
      return rec;
    }
    if (f.bounding_radius >= box.side / 2) {
      flag_inconclusive("flower wraps more than half the torus");
      return rec;
    }
    if (f.intersects_ball(center, radius, box)) ++rec.undecided_samples;
  }

  rec.recovered = rec.undecided_out + rec.lattice_in - rec.undecided_samples;
  return rec;
}

}  // namespace stm
