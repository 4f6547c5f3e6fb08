#include "core/matching.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/errors.hpp"
#include "core/grid.hpp"

namespace stm {

Matching::Matching(std::shared_ptr<const PointSet> phi, std::shared_ptr<const PointSet> psi)
    : phi_(std::move(phi)), psi_(std::move(psi)) {
  if (!phi_ || !psi_) throw InvalidArgument("matching: null point set");
  if (!phi_->box().same_as(psi_->box()))
    throw InvalidArgument("matching: mismatched boxes");
  partner_of_phi_.assign(phi_->size(), kUnmatched);
  partner_of_psi_.assign(psi_->size(), kUnmatched);
  round_of_phi_.assign(phi_->size(), 0);
}

Matching Matching::from_partners(std::shared_ptr<const PointSet> phi,
                                 std::shared_ptr<const PointSet> psi,
                                 std::vector<int64_t> partner_of_phi,
                                 std::vector<int32_t> round_of_phi) {
  Matching m(std::move(phi), std::move(psi));
  if (partner_of_phi.size() != m.phi_->size())
    throw InvalidArgument("matching: partner array size mismatch");
  if (round_of_phi.empty()) round_of_phi.assign(m.phi_->size(), 1);
  if (round_of_phi.size() != m.phi_->size())
    throw InvalidArgument("matching: round array size mismatch");
  for (size_t p = 0; p < partner_of_phi.size(); ++p) {
    const int64_t x = partner_of_phi[p];
    if (x == kUnmatched) continue;
    if (x < 0 || static_cast<size_t>(x) >= m.psi_->size())
      throw InvalidArgument("matching: partner index out of range");
    if (m.partner_of_psi_[static_cast<size_t>(x)] != kUnmatched)
      throw InvalidArgument("matching: sample point matched twice");
    m.set_pair(p, static_cast<size_t>(x), round_of_phi[p] > 0 ? round_of_phi[p] : 1);
  }
  return m;
}

void Matching::set_pair(size_t phi_idx, size_t psi_idx, int32_t round) {
  partner_of_phi_[phi_idx] = static_cast<int64_t>(psi_idx);
  partner_of_psi_[psi_idx] = static_cast<int64_t>(phi_idx);
  round_of_phi_[phi_idx] = round;
  round_count_ = std::max(round_count_, round);
  ++matched_count_;
}

double Matching::pair_dist(size_t i) const {
  const int64_t x = partner_of_phi_[i];
  if (x == kUnmatched) throw InvalidArgument("pair_dist: point is unmatched");
  return dist(phi_->point(i), psi_->point(static_cast<size_t>(x)), phi_->box());
}

std::vector<double> Matching::displacement_norms() const {
  std::vector<double> out;
  out.reserve(matched_count_);
  for (size_t i = 0; i < phi_->size(); ++i) {
    if (partner_of_phi_[i] != kUnmatched) out.push_back(pair_dist(i));
  }
  return out;
}

PointSet Matching::matched_psi_points() const {
  std::vector<char> keep(psi_->size(), 0);
  for (size_t i = 0; i < psi_->size(); ++i) keep[i] = partner_of_psi_[i] != kUnmatched;
  return psi_->filtered(keep);
}

void Matching::write_csv(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open for writing: " + path);
  std::fprintf(f, "# matching d=%d L=%.17g n_phi=%zu n_psi=%zu matched=%zu\n", phi_->dim(),
               phi_->box().side, phi_->size(), psi_->size(), matched_count_);
  std::fprintf(f, "# phi_index,psi_index,distance,round\n");
  for (size_t i = 0; i < phi_->size(); ++i) {
    if (partner_of_phi_[i] == kUnmatched) continue;
    std::fprintf(f, "%zu,%lld,%.17g,%d\n", i, static_cast<long long>(partner_of_phi_[i]),
                 pair_dist(i), round_of_phi_[i]);
  }
  std::fprintf(f, "# unmatched_psi\n");
  for (size_t i = 0; i < psi_->size(); ++i) {
    if (partner_of_psi_[i] == kUnmatched) std::fprintf(f, "%zu\n", i);
  }
  if (std::fclose(f) != 0) throw IoError("write failed: " + path);
}

Matching Matching::read_csv(const std::string& path, std::shared_ptr<const PointSet> phi,
                            std::shared_ptr<const PointSet> psi) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty matching file: " + path);
  int d = 0;
  double L = 0.0;
  size_t n_phi = 0, n_psi = 0, matched = 0;
  if (std::sscanf(line.c_str(), "# matching d=%d L=%lg n_phi=%zu n_psi=%zu matched=%zu", &d, &L,
                  &n_phi, &n_psi, &matched) != 5)
    throw IoError("malformed matching header: " + line);
  if (d != phi->dim() || n_phi != phi->size() || n_psi != psi->size())
    throw IoError("matching file does not describe the given point sets");
  std::vector<int64_t> partner(phi->size(), kUnmatched);
  std::vector<int32_t> rounds(phi->size(), 0);
  bool in_unmatched = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# unmatched_psi", 0) == 0) in_unmatched = true;
      continue;
    }
    if (in_unmatched) continue;  // tail indices are implied by the pair rows
    size_t pi;
    long long xi;
    double dd;
    int round;
    if (std::sscanf(line.c_str(), "%zu,%lld,%lg,%d", &pi, &xi, &dd, &round) != 4)
      throw IoError("malformed matching row: " + line);
    if (pi >= partner.size()) throw IoError("phi index out of range in " + path);
    partner[pi] = xi;
    rounds[pi] = round;
  }
  Matching m = from_partners(std::move(phi), std::move(psi), std::move(partner), std::move(rounds));
  if (m.matched_count() != matched) throw IoError("matching header count mismatch in " + path);
  return m;
}

// ---- production matcher ----

Matching stable_match(std::shared_ptr<const PointSet> phi, std::shared_ptr<const PointSet> psi) {
  Matching m(phi, psi);
  const size_t n_phi = phi->size(), n_psi = psi->size();
  if (n_phi == 0 || n_psi == 0) return m;

  NeighborIndex gphi(*phi), gpsi(*psi);
  constexpr uint32_t kNone = UINT32_MAX;
  std::vector<uint32_t> cand_phi(n_phi, kNone), cand_psi(n_psi, kNone);
  std::vector<uint32_t> live_phi(n_phi), live_psi(n_psi);
  for (size_t i = 0; i < n_phi; ++i) live_phi[i] = static_cast<uint32_t>(i);
  for (size_t i = 0; i < n_psi; ++i) live_psi[i] = static_cast<uint32_t>(i);

  std::vector<std::pair<uint32_t, uint32_t>> mutual;
  int32_t round = 1;
  while (!live_phi.empty() && !live_psi.empty()) {
    // refresh candidates whose previous best was matched in an earlier round;
    // a cached candidate stays optimal while it is alive because deaths only
    // remove competitors
    for (uint32_t p : live_phi) {
      if (cand_phi[p] == kNone || !gpsi.alive(cand_phi[p])) {
        uint32_t idx;
        double d2;
        if (!gpsi.nearest(phi->point(p), Side::phi, idx, d2))
          throw InvalidArgument("stable_match: internal candidate refresh failed");
        cand_phi[p] = idx;
      }
    }
    for (uint32_t x : live_psi) {
      if (cand_psi[x] == kNone || !gphi.alive(cand_psi[x])) {
        uint32_t idx;
        double d2;
        if (!gphi.nearest(psi->point(x), Side::psi, idx, d2))
          throw InvalidArgument("stable_match: internal candidate refresh failed");
        cand_psi[x] = idx;
      }
    }

    mutual.clear();
    for (uint32_t p : live_phi) {
      const uint32_t x = cand_phi[p];
      if (cand_psi[x] == p) mutual.emplace_back(p, x);
    }
    if (mutual.empty())
      throw InvalidArgument("stable_match: no mutual pair in a round (internal error)");

    for (const auto& [p, x] : mutual) {
      m.set_pair(p, x, round);
      gphi.set_dead(p);
      gpsi.set_dead(x);
    }
    ++round;

    auto drop_dead = [](std::vector<uint32_t>& live, const NeighborIndex& g) {
      size_t w = 0;
      for (uint32_t id : live)
        if (g.alive(id)) live[w++] = id;
      live.resize(w);
    };
    drop_dead(live_phi, gphi);
    drop_dead(live_psi, gpsi);
    if (gphi.should_rebuild()) gphi.rebuild();
    if (gpsi.should_rebuild()) gpsi.rebuild();
  }
  return m;
}

// ---- reference matcher ----

namespace {

struct PairEntry {
  double d2;
  uint32_t p, x;
};

// global pair order: distance, then minimum-image displacement phi->psi
// lexicographically, then indices; agrees with both endpoint preference
// orders whenever distances tie
bool pair_less(const PairEntry& a, const PairEntry& b, const PointSet& phi, const PointSet& psi) {
  if (a.d2 != b.d2) return a.d2 < b.d2;
  double da[kMaxDim], db[kMaxDim];
  const Box& box = phi.box();
  displacement(phi.point(a.p), psi.point(a.x), box, da);
  displacement(phi.point(b.p), psi.point(b.x), box, db);
  for (int i = 0; i < box.dim; ++i) {
    if (da[i] < db[i]) return true;
    if (da[i] > db[i]) return false;
  }
  if (a.p != b.p) return a.p < b.p;
  return a.x < b.x;
}

}  // namespace

Matching brute_force_match(std::shared_ptr<const PointSet> phi,
                           std::shared_ptr<const PointSet> psi) {
  Matching m(phi, psi);
  const size_t n_phi = phi->size(), n_psi = psi->size();
  if (n_phi == 0 || n_psi == 0) return m;
  if (n_phi * n_psi > 50000000)
    throw InvalidArgument("brute_force_match: instance too large for the quadratic reference");

  const Box& box = phi->box();
  std::vector<PairEntry> pairs;
  pairs.reserve(n_phi * n_psi);
  for (uint32_t p = 0; p < n_phi; ++p) {
    const double* pp = phi->point(p);
    for (uint32_t x = 0; x < n_psi; ++x) {
      pairs.push_back({dist2(pp, psi->point(x), box), p, x});
    }
  }
  std::sort(pairs.begin(), pairs.end(),
            [&](const PairEntry& a, const PairEntry& b) { return pair_less(a, b, *phi, *psi); });

  // greedy sweep in global order matches exactly the pairs of the iterated
  // mutual-best rounds; round numbers are reconstructed afterwards
  std::vector<char> phi_taken(n_phi, 0), psi_taken(n_psi, 0);
  std::vector<std::pair<uint32_t, uint32_t>> matched_order;
  for (const PairEntry& e : pairs) {
    if (phi_taken[e.p] || psi_taken[e.x]) continue;
    phi_taken[e.p] = psi_taken[e.x] = 1;
    matched_order.emplace_back(e.p, e.x);
    if (matched_order.size() == std::min(n_phi, n_psi)) break;
  }

  // a pair becomes reciprocal-best in the round after the last of its
  // strictly preferred alternatives was removed
  std::vector<int32_t> death_phi(n_phi, 0), death_psi(n_psi, 0);
  for (const auto& [p, x] : matched_order) {
    int32_t r = 1;
    const double* pp = phi->point(p);
    const double* px = psi->point(x);
    for (uint32_t y = 0; y < n_psi; ++y) {
      if (y == x) continue;
      if (prefers_idx(pp, psi->point(y), y, px, x, Side::phi, box))
        r = std::max(r, death_psi[y] + 1);
    }
    for (uint32_t q = 0; q < n_phi; ++q) {
      if (q == p) continue;
      if (prefers_idx(px, phi->point(q), q, pp, p, Side::psi, box))
        r = std::max(r, death_phi[q] + 1);
    }
    death_phi[p] = death_psi[x] = r;
    m.set_pair(p, x, r);
  }
  return m;
}

std::vector<std::pair<uint32_t, uint32_t>> find_unstable_pairs(const Matching& m) {
  const PointSet& phi = m.phi();
  const PointSet& psi = m.psi();
  const Box& box = phi.box();
  const size_t n_phi = phi.size(), n_psi = psi.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> phi_pd2(n_phi, kInf), psi_pd2(n_psi, kInf);
  for (size_t p = 0; p < n_phi; ++p) {
    const int64_t x = m.partner_of_phi(p);
    if (x != kUnmatched) {
      const double dd = dist2(phi.point(p), psi.point(static_cast<size_t>(x)), box);
      phi_pd2[p] = dd;
      psi_pd2[static_cast<size_t>(x)] = dd;
    }
  }

  std::vector<std::pair<uint32_t, uint32_t>> out;
  for (uint32_t p = 0; p < n_phi; ++p) {
    const double* pp = phi.point(p);
    const int64_t ppart = m.partner_of_phi(p);
    for (uint32_t x = 0; x < n_psi; ++x) {
      const double d2v = dist2(pp, psi.point(x), box);
      if (d2v > phi_pd2[p] || d2v > psi_pd2[x]) continue;
      // distance alone does not settle exact ties; fall back to the full order
      bool p_wants = d2v < phi_pd2[p];
      if (!p_wants) {
        if (ppart == kUnmatched)
          p_wants = true;
        else
          p_wants = prefers_idx(pp, psi.point(x), x, psi.point(static_cast<size_t>(ppart)),
                                static_cast<uint32_t>(ppart), Side::phi, box);
      }
      if (!p_wants) continue;
      bool x_wants = d2v < psi_pd2[x];
      if (!x_wants) {
        const int64_t xpart = m.partner_of_psi(x);
        if (xpart == kUnmatched)
          x_wants = true;
        else
          x_wants = prefers_idx(psi.point(x), pp, p, phi.point(static_cast<size_t>(xpart)),
                                static_cast<uint32_t>(xpart), Side::psi, box);
      }
      if (x_wants) out.emplace_back(p, x);
    }
  }
  return out;
}

// ---- one-sided sweep ----

void QueueTrace::write_csv(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open for writing: " + path);
  std::fprintf(f, "# queue_trace span=%zu\n", queue_len.empty() ? 0 : queue_len.size() - 1);
  std::fprintf(f, "# t,queue_len\n");
  for (size_t t = 0; t < queue_len.size(); ++t)
    std::fprintf(f, "%zu,%lld\n", t, static_cast<long long>(queue_len[t]));
  if (std::fclose(f) != 0) throw IoError("write failed: " + path);
}

QueueTrace QueueTrace::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  QueueTrace tr;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    size_t t;
    long long v;
    if (std::sscanf(line.c_str(), "%zu,%lld", &t, &v) != 2)
      throw IoError("malformed queue trace row: " + line);
    if (t != tr.queue_len.size()) throw IoError("queue trace rows out of order in " + path);
    tr.queue_len.push_back(v);
  }
  return tr;
}

std::pair<Matching, QueueTrace> one_sided_match(std::shared_ptr<const PointSet> phi,
                                                std::shared_ptr<const PointSet> psi) {
  if (phi->dim() != 1) throw InvalidArgument("one_sided_match: dim must be 1");
  Matching m(phi, psi);

  struct Event {
    double t;
    uint32_t idx;
    uint8_t kind;  // 0 arrival (phi), 1 service (psi)
  };
  std::vector<Event> ev;
  ev.reserve(phi->size() + psi->size());
  for (uint32_t i = 0; i < phi->size(); ++i) ev.push_back({phi->point(i)[0], i, 0});
  for (uint32_t i = 0; i < psi->size(); ++i) ev.push_back({psi->point(i)[0], i, 1});
  std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.kind != b.kind) return a.kind < b.kind;  // arrivals first at a tie
    return a.idx < b.idx;
  });

  std::vector<uint32_t> waiting;
  for (const Event& e : ev) {
    if (e.kind == 0) {
      waiting.push_back(e.idx);
    } else if (!waiting.empty()) {
      const uint32_t p = waiting.back();
      waiting.pop_back();
      m.set_pair(p, e.idx, 1);
    }
  }

  // queue length at integer times from the matched intervals: p contributes
  // to every integer t with p < t <= departure (unbounded when unmatched)
  const size_t span = static_cast<size_t>(std::floor(phi->box().side));
  std::vector<int64_t> diff(span + 2, 0);
  for (uint32_t p = 0; p < phi->size(); ++p) {
    const size_t t0 = static_cast<size_t>(std::floor(phi->point(p)[0])) + 1;
    if (t0 > span) continue;
    diff[t0] += 1;
    const int64_t x = m.partner_of_phi(p);
    if (x != kUnmatched) {
      const size_t t1 = static_cast<size_t>(std::floor(psi->point(static_cast<size_t>(x))[0])) + 1;
      if (t1 <= span) diff[t1] -= 1;
    }
  }
  QueueTrace tr;
  tr.queue_len.assign(span + 1, 0);
  int64_t acc = 0;
  for (size_t t = 0; t <= span; ++t) {
    acc += diff[t];
    tr.queue_len[t] = acc;
  }
  return {std::move(m), std::move(tr)};
}

}  // namespace stm
