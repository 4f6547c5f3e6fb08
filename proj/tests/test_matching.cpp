#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>
#include <vector>

#include "core/errors.hpp"
#include "core/matching.hpp"
#include "core/pointset.hpp"
#include "core/samplers.hpp"
#include "oracles.hpp"

using namespace stm;

namespace {

std::shared_ptr<const PointSet> make_ps(int d, double L, std::vector<double> coords,
                                        bool periodic = true) {
  Box b{d, L, periodic};
  return std::make_shared<PointSet>(b, std::move(coords), PointLabel::sample, 0);
}

std::shared_ptr<const PointSet> random_ps(int d, double L, size_t n, uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> u(0.0, L);
  std::vector<double> c;
  c.reserve(n * static_cast<size_t>(d));
  for (size_t i = 0; i < n * static_cast<size_t>(d); ++i) c.push_back(u(eng));
  return make_ps(d, L, std::move(c));
}

// coordinates on a coarse grid so exact distance ties are common
std::shared_ptr<const PointSet> gridded_ps(int d, double L, size_t n, uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_int_distribution<int> u(0, static_cast<int>(L) * 2 - 1);
  std::vector<double> c;
  c.reserve(n * static_cast<size_t>(d));
  for (size_t i = 0; i < n * static_cast<size_t>(d); ++i) c.push_back(0.5 * u(eng));
  return make_ps(d, L, std::move(c));
}

bool same_matching(const Matching& a, const Matching& b) {
  if (a.phi().size() != b.phi().size()) return false;
  for (size_t i = 0; i < a.phi().size(); ++i)
    if (a.partner_of_phi(i) != b.partner_of_phi(i)) return false;
  return true;
}

void check_against_oracle(const Matching& got, const oracle::MatchResult& want) {
  REQUIRE(got.phi().size() == want.partner_of_phi.size());
  for (size_t i = 0; i < want.partner_of_phi.size(); ++i) {
    CHECK(got.partner_of_phi(i) == want.partner_of_phi[i]);
    CHECK(got.round_of_phi(i) == want.round_of_phi[i]);
  }
  CHECK(got.round_count() == want.rounds);
  CHECK(got.matched_count() == want.matched);
}

}  // namespace

TEST_CASE("two-sided: single pair matches in one round") {
  auto phi = make_ps(1, 10.0, {0.0});
  auto psi = make_ps(1, 10.0, {0.3});
  Matching m = stable_match(phi, psi);
  CHECK(m.partner_of_phi(0) == 0);
  CHECK(m.partner_of_psi(0) == 0);
  CHECK(m.round_of_phi(0) == 1);
  CHECK(m.round_count() == 1);
  CHECK(m.matched_count() == 1);
  CHECK(m.pair_dist(0) == doctest::Approx(0.3));
  CHECK(find_unstable_pairs(m).empty());
}

TEST_CASE("two-sided: surplus sample point stays unmatched") {
  // nearest pair (5, 4.6) pairs off; 0 then takes 1; the point 4 is left over
  auto phi = make_ps(1, 10.0, {0.0, 5.0});
  auto psi = make_ps(1, 10.0, {1.0, 4.0, 4.6});
  Matching m = stable_match(phi, psi);
  CHECK(m.partner_of_phi(0) == 0);
  CHECK(m.partner_of_phi(1) == 2);
  CHECK(m.partner_of_psi(1) == kUnmatched);
  CHECK(m.matched_count() == 2);
  // (0,1) and (5,4.6) are each mutually nearest straight away, so both pairs
  // belong to the first round
  CHECK(m.round_of_phi(0) == 1);
  CHECK(m.round_of_phi(1) == 1);
  CHECK(find_unstable_pairs(m).empty());
  CHECK(same_matching(m, brute_force_match(phi, psi)));
}

TEST_CASE("two-sided: equidistant pair resolves by the preference order") {
  // (0, 0.4) and (1, 0.6) are both at distance 0.4; either processing order
  // must land on the same matching
  auto phi = make_ps(1, 10.0, {0.0, 1.0});
  auto psi = make_ps(1, 10.0, {0.4, 0.6});
  Matching m = stable_match(phi, psi);
  CHECK(m.partner_of_phi(0) == 0);
  CHECK(m.partner_of_phi(1) == 1);
  CHECK(m.round_of_phi(0) == 1);
  CHECK(m.round_of_phi(1) == 1);
  Matching bf = brute_force_match(phi, psi);
  CHECK(same_matching(m, bf));
  CHECK(find_unstable_pairs(m).empty());
  CHECK(find_unstable_pairs(bf).empty());
}

TEST_CASE("stability audit: crosswise matching reports both pairs") {
  auto phi = make_ps(1, 10.0, {0.0, 2.0});
  auto psi = make_ps(1, 10.0, {0.1, 1.9});
  Matching m = Matching::from_partners(phi, psi, {1, 0});
  auto bad = find_unstable_pairs(m);
  REQUIRE(bad.size() == 2);
  std::sort(bad.begin(), bad.end());
  CHECK(bad[0] == std::make_pair(uint32_t{0}, uint32_t{0}));
  CHECK(bad[1] == std::make_pair(uint32_t{1}, uint32_t{1}));
}

TEST_CASE("stability audit: unmatched point closer than the partner is flagged") {
  auto phi = make_ps(1, 10.0, {0.0});
  auto psi = make_ps(1, 10.0, {3.0, 0.5});
  Matching m = Matching::from_partners(phi, psi, {0});  // pairs 0 with 3.0
  auto bad = find_unstable_pairs(m);
  REQUIRE(bad.size() == 1);
  CHECK(bad[0] == std::make_pair(uint32_t{0}, uint32_t{1}));

  // the stable matching of the same instance is clean
  CHECK(find_unstable_pairs(stable_match(phi, psi)).empty());
}

TEST_CASE("from_partners validates the arrays") {
  auto phi = make_ps(1, 10.0, {0.0, 2.0});
  auto psi = make_ps(1, 10.0, {0.1, 1.9});
  CHECK_THROWS_AS(Matching::from_partners(phi, psi, {0}), InvalidArgument);
  CHECK_THROWS_AS(Matching::from_partners(phi, psi, {0, 0}), InvalidArgument);
  CHECK_THROWS_AS(Matching::from_partners(phi, psi, {0, 7}), InvalidArgument);
  CHECK_NOTHROW(Matching::from_partners(phi, psi, {kUnmatched, 0}));

  auto other = make_ps(1, 20.0, {0.0});
  CHECK_THROWS_AS(Matching(phi, other), InvalidArgument);
}

TEST_CASE("two-sided matches the round-by-round reference on random instances") {
  std::mt19937_64 eng(2024);
  for (int rep = 0; rep < 30; ++rep) {
    const int d = 1 + rep % 2;
    const double L = 8.0;
    const size_t na = 10 + eng() % 30;
    const size_t nb = 10 + eng() % 30;
    auto phi = (rep % 3 == 0) ? gridded_ps(d, L, na, eng()) : random_ps(d, L, na, eng());
    auto psi = (rep % 3 == 0) ? gridded_ps(d, L, nb, eng()) : random_ps(d, L, nb, eng());
    Matching m = stable_match(phi, psi);
    oracle::MatchResult want = oracle::match(*phi, *psi);
    check_against_oracle(m, want);
    CHECK(find_unstable_pairs(m).empty());
  }
}

TEST_CASE("two-sided equals the global-sweep reference on sampled instances") {
  // 25-site lattice vs ~50 Poisson points, 100 seeds
  LatticeSpec spec;
  spec.dim = 2;
  spec.side = 5;
  auto phi = std::make_shared<PointSet>(make_lattice(spec));
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    auto psi = std::make_shared<PointSet>(sample_poisson(2, 5.0, 2.0, seed));
    Matching fast = stable_match(phi, psi);
    Matching ref = brute_force_match(phi, psi);
    CHECK(same_matching(fast, ref));
    CHECK(fast.matched_count() == std::min(phi->size(), psi->size()));
  }
}

TEST_CASE("completeness: matched count is the smaller side, either way round") {
  auto phi = random_ps(2, 6.0, 20, 11);
  auto psi_big = random_ps(2, 6.0, 35, 12);
  auto psi_small = random_ps(2, 6.0, 9, 13);
  CHECK(stable_match(phi, psi_big).matched_count() == 20);
  CHECK(stable_match(phi, psi_small).matched_count() == 9);
  auto empty = make_ps(2, 6.0, {});
  CHECK(stable_match(phi, empty).matched_count() == 0);
}

TEST_CASE("matching is covariant under torus shifts") {
  for (uint64_t seed = 1; seed <= 6; ++seed) {
    const int d = 2;
    const double L = 7.0;
    auto phi = random_ps(d, L, 25, seed * 2);
    auto psi = random_ps(d, L, 30, seed * 2 + 1);
    Matching base = stable_match(phi, psi);

    const double shifts[2][2] = {{3.0, 5.0}, {1.5, 0.25}};
    for (const double* z : shifts) {
      auto shift = [&](const PointSet& ps) {
        std::vector<double> c(ps.coords());
        for (size_t i = 0; i < c.size(); ++i) {
          c[i] += z[i % 2];
          c[i] -= L * std::floor(c[i] / L);
        }
        return make_ps(d, L, std::move(c));
      };
      Matching shifted = stable_match(shift(*phi), shift(*psi));
      CHECK(same_matching(base, shifted));
    }
  }
}

TEST_CASE("restriction to the matched sample set reproduces the matching") {
  for (uint64_t seed = 1; seed <= 6; ++seed) {
    auto phi = random_ps(2, 7.0, 20, seed * 10);
    auto psi = random_ps(2, 7.0, 33, seed * 10 + 5);
    Matching m = stable_match(phi, psi);
    auto matched = std::make_shared<PointSet>(m.matched_psi_points());
    REQUIRE(matched->size() == m.matched_count());

    // map old psi index -> rank among matched (matched_psi_points keeps order)
    std::vector<int64_t> rank(psi->size(), -1);
    int64_t next = 0;
    for (size_t j = 0; j < psi->size(); ++j)
      if (m.partner_of_psi(j) != kUnmatched) rank[j] = next++;

    Matching again = stable_match(phi, matched);
    for (size_t i = 0; i < phi->size(); ++i) {
      REQUIRE(m.partner_of_phi(i) != kUnmatched);
      CHECK(again.partner_of_phi(i) == rank[static_cast<size_t>(m.partner_of_phi(i))]);
    }
  }
}

TEST_CASE("matched sample subset and displacement norms are consistent") {
  auto phi = random_ps(2, 6.0, 15, 3);
  auto psi = random_ps(2, 6.0, 24, 4);
  Matching m = stable_match(phi, psi);
  PointSet sub = m.matched_psi_points();
  CHECK(sub.size() == m.matched_count());
  size_t k = 0;
  for (size_t j = 0; j < psi->size(); ++j) {
    if (m.partner_of_psi(j) == kUnmatched) continue;
    for (int a = 0; a < 2; ++a) CHECK(sub.point(k)[a] == psi->point(j)[a]);
    ++k;
  }
  std::vector<double> norms = m.displacement_norms();
  REQUIRE(norms.size() == m.matched_count());
  size_t at = 0;
  for (size_t i = 0; i < phi->size(); ++i) {
    if (m.partner_of_phi(i) == kUnmatched) continue;
    const double want =
        oracle::dist(phi->point(i), psi->point(static_cast<size_t>(m.partner_of_phi(i))),
                     phi->box());
    CHECK(norms[at] == doctest::Approx(want).epsilon(1e-12));
    CHECK(m.pair_dist(i) == doctest::Approx(want).epsilon(1e-12));
    ++at;
  }

  // unmatched phi points reject distance queries
  auto tiny = make_ps(2, 6.0, {0.0, 0.0});
  Matching none = stable_match(tiny, make_ps(2, 6.0, {}));
  CHECK_THROWS_AS(none.pair_dist(0), InvalidArgument);
}

TEST_CASE("round bookkeeping: rounds are 1..round_count for matched points") {
  auto phi = random_ps(1, 40.0, 35, 21);
  auto psi = random_ps(1, 40.0, 40, 22);
  Matching m = stable_match(phi, psi);
  int32_t seen_max = 0;
  for (size_t i = 0; i < phi->size(); ++i) {
    if (m.partner_of_phi(i) == kUnmatched) {
      CHECK(m.round_of_phi(i) == 0);
    } else {
      CHECK(m.round_of_phi(i) >= 1);
      CHECK(m.round_of_phi(i) <= m.round_count());
      seen_max = std::max(seen_max, m.round_of_phi(i));
    }
  }
  CHECK(seen_max == m.round_count());
}

TEST_CASE("matching csv round trip") {
  auto phi = random_ps(2, 6.0, 12, 5);
  auto psi = random_ps(2, 6.0, 17, 6);
  Matching m = stable_match(phi, psi);
  const std::string path = "matching_roundtrip.csv";
  m.write_csv(path);
  Matching back = Matching::read_csv(path, phi, psi);
  CHECK(same_matching(m, back));
  for (size_t i = 0; i < phi->size(); ++i) CHECK(back.round_of_phi(i) == m.round_of_phi(i));
  for (size_t j = 0; j < psi->size(); ++j) CHECK(back.partner_of_psi(j) == m.partner_of_psi(j));
  std::remove(path.c_str());
}

TEST_CASE("one-sided: immediate service leaves the queue empty") {
  auto phi = make_ps(1, 2.0, {0.0, 1.0});
  auto psi = make_ps(1, 2.0, {0.5, 1.5});
  auto [m, trace] = one_sided_match(phi, psi);
  CHECK(m.partner_of_phi(0) == 0);
  CHECK(m.partner_of_phi(1) == 1);
  REQUIRE(trace.queue_len.size() == 3);
  CHECK(trace.queue_len[0] == 0);
  CHECK(trace.queue_len[1] == 0);
  CHECK(trace.queue_len[2] == 0);
}

TEST_CASE("one-sided: service order is last-in-first-out") {
  auto phi = make_ps(1, 2.0, {0.0, 1.0});
  auto psi = make_ps(1, 2.0, {1.2, 1.4});
  auto [m, trace] = one_sided_match(phi, psi);
  CHECK(m.partner_of_phi(1) == 0);  // 1 pops first, takes 1.2
  CHECK(m.partner_of_phi(0) == 1);  // 0 waits for 1.4
  REQUIRE(trace.queue_len.size() == 3);
  CHECK(trace.queue_len[0] == 0);
  CHECK(trace.queue_len[1] == 1);  // the point at 0 is still waiting at t=1
  CHECK(trace.queue_len[2] == 0);

  CHECK_THROWS_AS(one_sided_match(make_ps(2, 2.0, {0.0, 0.0}), make_ps(2, 2.0, {})),
                  InvalidArgument);
}

TEST_CASE("one-sided: waiting displacements are nonnegative, queue identity exact") {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    const double span = 200.0;
    LatticeSpec spec;
    spec.dim = 1;
    spec.side = 200;
    auto phi = std::make_shared<PointSet>(make_lattice(spec));
    auto psi = std::make_shared<PointSet>(sample_poisson(1, span, 1.05, seed));
    auto [m, trace] = one_sided_match(phi, psi);

    for (size_t i = 0; i < phi->size(); ++i) {
      const int64_t x = m.partner_of_phi(i);
      if (x == kUnmatched) continue;
      CHECK(psi->point(static_cast<size_t>(x))[0] >= phi->point(i)[0]);
    }

    // L(0) - L(t) + #phi in [0,t) equals the matched sample count in [0,t)
    REQUIRE(trace.queue_len.size() == 201);
    for (int64_t t = 0; t <= 200; ++t) {
      int64_t matched_before = 0;
      for (size_t j = 0; j < psi->size(); ++j)
        if (m.partner_of_psi(j) != kUnmatched && psi->point(j)[0] < static_cast<double>(t))
          ++matched_before;
      const int64_t phi_before = t;  // integer lattice sites in [0,t)
      CHECK(trace.queue_len[0] - trace.queue_len[static_cast<size_t>(t)] + phi_before ==
            matched_before);
      CHECK(trace.queue_len[static_cast<size_t>(t)] >= 0);
    }
  }
}

TEST_CASE("one-sided: queue trace csv round trip") {
  auto phi = make_ps(1, 5.0, {0.0, 1.0, 2.0, 3.0, 4.0});
  auto psi = make_ps(1, 5.0, {0.7, 2.9, 3.1, 4.5});
  auto [m, trace] = one_sided_match(phi, psi);
  const std::string path = "queue_roundtrip.csv";
  trace.write_csv(path);
  QueueTrace back = QueueTrace::read_csv(path);
  CHECK(back.queue_len == trace.queue_len);
  std::remove(path.c_str());
}
