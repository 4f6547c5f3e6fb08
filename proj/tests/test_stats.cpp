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
#include "core/stats.hpp"
#include "oracles.hpp"

using namespace stm;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::shared_ptr<const PointSet> make_ps(int d, double L, std::vector<double> coords) {
  Box b{d, L, true};
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

PointSet matched_poisson_1d(int64_t side, double alpha, uint64_t seed) {
  LatticeSpec spec;
  spec.dim = 1;
  spec.side = side;
  auto phi = std::make_shared<PointSet>(make_lattice(spec));
  auto psi = std::make_shared<PointSet>(
      sample_poisson(1, static_cast<double>(side), alpha, seed));
  Matching m = stable_match(phi, psi);
  return m.matched_psi_points();
}

}  // namespace

TEST_CASE("eccdf: single observation") {
  Eccdf e = eccdf_from_values({0.3});
  REQUIRE(e.value.size() == 1);
  CHECK(e.value[0] == 0.3);
  CHECK(e.tail[0] == 0.0);  // nothing exceeds the only value
  CHECK(e.n == 1);
}

TEST_CASE("eccdf: two observations pin the midpoint tail at one half") {
  Eccdf e = eccdf_from_values({0.6, 0.2});
  REQUIRE(e.value.size() == 2);
  CHECK(e.value[0] == 0.2);
  CHECK(e.value[1] == 0.6);
  CHECK(e.tail[0] == 0.5);  // the tail on [0.2, 0.6) — in particular at 0.4
  CHECK(e.tail[1] == 0.0);
  CHECK(e.n == 2);
}

TEST_CASE("eccdf is the exact order statistic, duplicates pooled") {
  std::mt19937_64 eng(9);
  std::vector<double> vals;
  for (int i = 0; i < 200; ++i) vals.push_back(0.25 * static_cast<double>(eng() % 40));
  Eccdf e = eccdf_from_values(vals);
  CHECK(e.n == 200);
  REQUIRE(!e.value.empty());
  for (size_t i = 0; i + 1 < e.value.size(); ++i) {
    CHECK(e.value[i] < e.value[i + 1]);
    CHECK(e.tail[i] >= e.tail[i + 1]);
  }
  CHECK(e.tail.back() == 0.0);
  for (size_t i = 0; i < e.value.size(); ++i) {
    size_t above = 0;
    for (double v : vals)
      if (v > e.value[i]) ++above;
    CHECK(e.tail[i] * 200.0 == doctest::Approx(static_cast<double>(above)).epsilon(1e-13));
  }

  // the matching wrapper feeds the displacement norms through unchanged
  auto phi = random_ps(2, 8.0, 12, 31);
  auto psi = random_ps(2, 8.0, 20, 32);
  Matching m = stable_match(phi, psi);
  Eccdf from_m = matching_distance_eccdf(m);
  Eccdf direct = eccdf_from_values(m.displacement_norms());
  CHECK(from_m.value == direct.value);
  CHECK(from_m.tail == direct.tail);

  Matching none = Matching::from_partners(phi, psi, std::vector<int64_t>(12, kUnmatched));
  CHECK_THROWS_AS(matching_distance_eccdf(none), InvalidArgument);
}

TEST_CASE("scattering: a single point scatters uniformly") {
  auto ps = make_ps(2, 10.0, {3.7, 8.2});
  Scattering s = scattering_intensity(*ps, 4);
  REQUIRE(s.size() > 0);
  for (size_t i = 0; i < s.size(); ++i) CHECK(s.s[i] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("scattering: perfect lattice is dark off the dual lattice") {
  LatticeSpec spec;
  spec.dim = 2;
  spec.side = 4;
  auto ps = std::make_shared<PointSet>(make_lattice(spec));
  const double n = static_cast<double>(ps->size());
  Scattering s = scattering_intensity(*ps, 8);
  size_t bragg_seen = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    const int32_t mx = s.modes[2 * i], my = s.modes[2 * i + 1];
    const bool dual = mx % 4 == 0 && my % 4 == 0;
    CHECK(s.bragg[i] == (dual ? 1 : 0));
    if (dual) {
      ++bragg_seen;
      CHECK(std::abs(s.s[i] - n) <= 1e-8 * n);
    } else {
      CHECK(std::abs(s.s[i]) <= 1e-8 * n);
    }
  }
  CHECK(bragg_seen == 8);  // (0,4),(0,8),(4,0),(4,4),(4,8),(8,0),(8,4),(8,8)
}

TEST_CASE("scattering equals the direct complex sum") {
  for (int d = 1; d <= 2; ++d) {
    auto ps = random_ps(d, 7.3, 400, 100 + static_cast<uint64_t>(d));
    Scattering s = scattering_intensity(*ps, d == 1 ? 40 : 6);
    REQUIRE(s.size() > 0);
    for (size_t i = 0; i < s.size(); ++i) {
      const double want = oracle::scattering_at(*ps, &s.modes[i * static_cast<size_t>(d)]);
      CHECK(std::abs(s.s[i] - want) / (std::abs(want) + 1e-12) <= 1e-10);
      // |k| column is consistent with the mode row
      double k2 = 0.0;
      for (int a = 0; a < d; ++a) {
        const double kk = 2.0 * kPi / 7.3 * s.modes[i * static_cast<size_t>(d) + a];
        k2 += kk * kk;
      }
      CHECK(s.k[i] == doctest::Approx(std::sqrt(k2)).epsilon(1e-12));
    }
  }
}

TEST_CASE("scattering: Poisson plateau at one for large wavenumbers") {
  auto ps = std::make_shared<PointSet>(sample_poisson(2, 20.0, 2.0, 5));
  Scattering s = scattering_intensity(*ps, 15);
  double sum = 0.0, sum2 = 0.0, cnt = 0.0;
  for (size_t i = 0; i < s.size(); ++i) {
    const int32_t mx = s.modes[2 * i], my = s.modes[2 * i + 1];
    if (s.bragg[i]) continue;
    if (mx * mx + my * my < 64) continue;
    sum += s.s[i];
    sum2 += s.s[i] * s.s[i];
    cnt += 1.0;
  }
  REQUIRE(cnt > 50.0);
  const double mean = sum / cnt;
  const double sd = std::sqrt(std::max(0.0, sum2 / cnt - mean * mean));
  CHECK(std::abs(mean - 1.0) <= 3.0 * sd / std::sqrt(cnt));
}

TEST_CASE("number variance: Poisson variance equals the mean count") {
  // the per-sample spatial variance scatters a few percent around the
  // ensemble value, so average the estimate over four independent samples
  const std::vector<double> radii{1.0, 2.0, 3.0, 4.0, 5.0};
  std::vector<double> var_sum(radii.size(), 0.0), mean_sum(radii.size(), 0.0);
  const int reps = 4;
  for (int rep = 0; rep < reps; ++rep) {
    auto ps = std::make_shared<PointSet>(
        sample_poisson(2, 100.0, 2.0, 8 + static_cast<uint64_t>(rep)));
    NumberVariance nv = number_variance(*ps, radii, 25000, 17);
    REQUIRE(nv.radius.size() == radii.size());
    CHECK(nv.centers == 25000);
    for (size_t i = 0; i < radii.size(); ++i) {
      var_sum[i] += nv.variance[i] / reps;
      mean_sum[i] += nv.mean[i] / reps;
      CHECK(nv.se[i] > 0.0);
    }
  }
  for (size_t i = 0; i < radii.size(); ++i) {
    const double want = 2.0 * kPi * radii[i] * radii[i];
    CHECK(std::abs(var_sum[i] - want) <= 0.05 * want);
    CHECK(std::abs(mean_sum[i] - want) <= 0.05 * want);  // intensity 2 ball mean
  }

  // determinism in the window seed
  auto ps = std::make_shared<PointSet>(sample_poisson(2, 100.0, 2.0, 8));
  NumberVariance again = number_variance(*ps, radii, 1000, 17);
  NumberVariance other = number_variance(*ps, radii, 1000, 18);
  NumberVariance refc = number_variance(*ps, radii, 1000, 17);
  CHECK(again.variance == refc.variance);
  CHECK(again.variance != other.variance);

  CHECK_THROWS_AS(number_variance(*ps, {60.0}, 1000, 1), InvalidArgument);
  CHECK_THROWS_AS(number_variance(*ps, {}, 1000, 1), InvalidArgument);
}

TEST_CASE("number variance: lattice counts fluctuate on the surface scale only") {
  LatticeSpec spec;
  spec.dim = 2;
  spec.side = 20;
  auto ps = std::make_shared<PointSet>(make_lattice(spec));
  std::vector<double> radii;
  for (double r = 0.8; r <= 6.01; r += 0.4) radii.push_back(r);
  NumberVariance nv = number_variance(*ps, radii, 60000, 3);
  for (size_t i = 0; i < nv.radius.size(); ++i) {
    const double r = nv.radius[i];
    CHECK(nv.mean[i] == doctest::Approx(kPi * r * r).epsilon(0.02));
    CHECK(nv.variance[i] <= 4.0 * r);  // far below the Poisson pi r^2
  }
}

TEST_CASE("number variance matches the exact 1D overlap integral") {
  auto ps = random_ps(1, 12.0, 15, 77);
  const std::vector<double> radii{0.7, 1.3, 2.5};
  NumberVariance nv = number_variance(*ps, radii, 4000000, 5);
  for (size_t i = 0; i < radii.size(); ++i) {
    double mean = 0.0, var = 0.0;
    oracle::numvar_1d_exact(*ps, nv.radius[i], &mean, &var);
    CHECK(std::abs(nv.mean[i] - mean) <= 4e-3 * mean);
    CHECK(std::abs(nv.variance[i] - var) <= std::max(4.0 * nv.se[i], 2e-3 * var));
  }
}

TEST_CASE("pair correlation: Poisson sample is flat at one") {
  const double rmax = 5.0;
  const int nbins = 25;
  const int seeds = 5;
  std::vector<double> pooled(nbins, 0.0);
  double n_avg = 0.0;
  for (int s = 0; s < seeds; ++s) {
    auto ps = std::make_shared<PointSet>(
        sample_poisson(2, 30.0, 2.0, 21 + static_cast<uint64_t>(s)));
    n_avg += static_cast<double>(ps->size()) / seeds;
    PairCorrelation pc = pair_correlation(*ps, rmax, nbins);
    REQUIRE(pc.r.size() == static_cast<size_t>(nbins));
    for (int b = 0; b < nbins; ++b) pooled[b] += pc.g[b] / seeds;
  }
  const double rho = n_avg / (30.0 * 30.0);
  const double dr = rmax / nbins;
  for (int b = 0; b < nbins; ++b) {
    const double lo = dr * b, hi = dr * (b + 1);
    const double shell = kPi * (hi * hi - lo * lo);
    const double pairs = n_avg * rho * shell * seeds;  // ordered, pooled
    const double se = 1.0 / std::sqrt(pairs);
    CHECK(std::abs(pooled[b] - 1.0) <= 3.5 * se + 0.01);
  }
  auto ps = std::make_shared<PointSet>(sample_poisson(2, 30.0, 2.0, 21));
  CHECK_THROWS_AS(pair_correlation(*ps, 15.0, 10), InvalidArgument);
}

TEST_CASE("pair correlation: lattice mass sits on the shell distances") {
  LatticeSpec spec;
  spec.dim = 2;
  spec.side = 10;
  auto ps = std::make_shared<PointSet>(make_lattice(spec));
  const double rmax = 2.2;
  const int nbins = 22;
  PairCorrelation pc = pair_correlation(*ps, rmax, nbins);
  const double dists[3] = {1.0, std::sqrt(2.0), 2.0};
  int nonzero = 0;
  for (int b = 0; b < nbins; ++b) {
    const double lo = 0.1 * b, hi = 0.1 * (b + 1);
    bool allowed = false;
    for (double t : dists)
      if (t >= lo - 1e-9 && t <= hi + 1e-9) allowed = true;
    if (pc.g[b] > 0.0) {
      ++nonzero;
      CHECK(allowed);
      CHECK(pc.g[b] > 3.0);  // concentrated mass, far above an ideal gas
    }
  }
  CHECK(nonzero == 3);
}

TEST_CASE("pair correlation of the matched set settles to one by r of ten") {
  // The matched set keeps its partner within a fraction of a lattice spacing,
  // so with fine shells the pair histogram carries a persistent period-one
  // comb (the product of the lattice-periodic one-point densities). Unit-wide
  // shells integrate that product over exactly one period, leaving only the
  // genuinely decaying part of the correlation.
  const int nbins = 20;
  const double rmax = 20.0;
  const int seeds = 10;
  std::vector<double> mean(nbins, 0.0), m2(nbins, 0.0);
  for (uint64_t s = 1; s <= seeds; ++s) {
    PointSet m = matched_poisson_1d(300, 2.0, s);
    REQUIRE(m.size() == 300);
    PairCorrelation pc = pair_correlation(m, rmax, nbins);
    for (int b = 0; b < nbins; ++b) {
      mean[b] += pc.g[b] / seeds;
      m2[b] += pc.g[b] * pc.g[b] / seeds;
    }
  }
  const double dr = rmax / nbins;
  for (int b = 0; b < nbins; ++b) {
    const double mid = dr * (b + 0.5);
    if (mid <= 10.0) continue;
    const double sd = std::sqrt(std::max(0.0, m2[b] - mean[b] * mean[b]));
    const double se = sd / std::sqrt(static_cast<double>(seeds));
    CHECK(std::abs(mean[b] - 1.0) <= 3.0 * se + 0.01);
  }
}

TEST_CASE("power-law fit recovers exact and noisy slopes") {
  std::vector<double> x, y;
  for (int i = 0; i < 10; ++i) {
    const double xs = std::pow(10.0, 0.2 * i);
    x.push_back(xs);
    y.push_back(3.0 * xs * xs);
  }
  Fit f = fit_power_law(x, y);
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.n == 10);

  // 1% multiplicative wobble moves the slope by well under 0.05
  std::vector<double> xn, yn;
  for (int i = 0; i < 30; ++i) {
    const double xs = std::pow(10.0, 0.1 * i);
    xn.push_back(xs);
    yn.push_back(xs * std::exp(0.01 * std::sin(3.7 * i)));
  }
  Fit g = fit_power_law(xn, yn);
  CHECK(std::abs(g.slope - 1.0) <= 0.05);

  // zero rows are dropped, not logged
  std::vector<double> xz{0.0, 1.0, 2.0, 4.0}, yz{5.0, 2.0, 4.0, 8.0};
  Fit h = fit_power_law(xz, yz);
  CHECK(h.n == 3);
  CHECK(h.slope == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(fit_power_law({1.0, 2.0}, {0.0, -1.0}), InvalidArgument);
}

TEST_CASE("semilog fit recovers an exponential decay") {
  std::vector<double> x, y;
  for (int i = 0; i < 12; ++i) {
    const double xs = 0.3 * i;
    x.push_back(xs);
    y.push_back(5.0 * std::exp(-2.0 * xs));
  }
  Fit f = fit_semilog(x, y);
  CHECK(f.slope == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(std::exp(f.intercept) == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("log binning pools rows geometrically and honors the skip mask") {
  std::vector<double> x, y;
  std::vector<uint8_t> skip;
  for (int i = 0; i < 48; ++i) {
    x.push_back(std::pow(10.0, i / 24.0));  // two decades
    y.push_back(7.0);
    skip.push_back(i % 4 == 0 ? 1 : 0);
  }
  BinnedCurve c = log_bin(x, y, &skip, 12);
  REQUIRE(!c.x.empty());
  CHECK(c.x.size() <= 25);
  int64_t pooled = 0;
  for (size_t b = 0; b < c.x.size(); ++b) {
    CHECK(c.y[b] == doctest::Approx(7.0));
    if (b) CHECK(c.x[b] > c.x[b - 1]);
    pooled += c.n[b];
  }
  CHECK(pooled == 36);  // every fourth row skipped

  BinnedCurve all = log_bin(x, y, nullptr, 12);
  int64_t pooled_all = 0;
  for (int64_t n : all.n) pooled_all += n;
  CHECK(pooled_all == 48);
}

TEST_CASE("table csv round trip is bit exact") {
  Table t;
  t.meta["alpha"] = "2.0";
  t.meta["note"] = "fixture";
  t.names = {"r", "value"};
  t.columns = {{0.1, 1.0 / 3.0, 7e-17, -4.25}, {1.0, 2.0, 3.0, 5e300}};
  const std::string path = "table_roundtrip.csv";
  t.write_csv(path);
  Table back = Table::read_csv(path);
  CHECK(back.meta == t.meta);
  CHECK(back.names == t.names);
  REQUIRE(back.columns.size() == 2);
  CHECK(back.columns[0] == t.columns[0]);
  CHECK(back.columns[1] == t.columns[1]);
  std::remove(path.c_str());

  // stats tables expose their structure through the same type
  auto ps = random_ps(1, 9.0, 30, 2);
  NumberVariance nv = number_variance(*ps, {1.0, 2.0}, 1000, 4);
  Table tv = nv.to_table();
  CHECK(tv.rows() == 2);
  CHECK_NOTHROW(tv.column("radius"));
  CHECK_THROWS_AS(tv.column("no-such-column"), InvalidArgument);
}
