#include "core/stats.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>

#include "core/errors.hpp"
#include "core/grid.hpp"
#include "core/rng.hpp"

namespace stm {

// ---- table ----

const std::vector<double>& Table::column(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return columns[i];
  throw InvalidArgument("table: no column named " + name);
}

void Table::write_csv(const std::string& path) const {
  for (const auto& c : columns)
    if (c.size() != rows()) throw InvalidArgument("table: ragged columns");
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open for writing: " + path);
  std::fputc('#', f);
  for (const auto& kv : meta) std::fprintf(f, " %s=%s", kv.first.c_str(), kv.second.c_str());
  std::fputc('\n', f);
  std::fputc('#', f);
  for (size_t i = 0; i < names.size(); ++i)
    std::fprintf(f, i ? ",%s" : " %s", names[i].c_str());
  std::fputc('\n', f);
  for (size_t r = 0; r < rows(); ++r) {
    for (size_t c = 0; c < columns.size(); ++c)
      std::fprintf(f, c ? ",%.17g" : "%.17g", columns[c][r]);
    std::fputc('\n', f);
  }
  if (std::fclose(f) != 0) throw IoError("write failed: " + path);
}

Table Table::read_csv(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "r");
  if (!f) throw IoError("cannot open for reading: " + path);
  Table t;
  char line[8192];
  int header = 0;
  while (std::fgets(line, sizeof line, f)) {
    size_t len = std::strlen(line);
    while (len && (line[len - 1] == '\n' || line[len - 1] == '\r')) line[--len] = 0;
    if (len == 0) continue;
    if (line[0] == '#') {
      std::string body(line + 1);
      if (header == 0) {
        size_t pos = 0;
        while (pos < body.size()) {
          while (pos < body.size() && body[pos] == ' ') ++pos;
          size_t end = body.find(' ', pos);
          if (end == std::string::npos) end = body.size();
          const std::string tok = body.substr(pos, end - pos);
          const size_t eq = tok.find('=');
          if (eq != std::string::npos) t.meta[tok.substr(0, eq)] = tok.substr(eq + 1);
          pos = end;
        }
      } else if (header == 1) {
        size_t pos = 0;
        while (pos < body.size() && body[pos] == ' ') ++pos;
        while (pos <= body.size()) {
          size_t end = body.find(',', pos);
          if (end == std::string::npos) end = body.size();
          t.names.push_back(body.substr(pos, end - pos));
          if (end == body.size()) break;
          pos = end + 1;
        }
        t.columns.assign(t.names.size(), {});
      }
      ++header;
      continue;
    }
    if (t.columns.empty()) {
      std::fclose(f);
      throw IoError("table header missing in " + path);
    }
    const char* p = line;
    for (size_t c = 0; c < t.columns.size(); ++c) {
      char* endp = nullptr;
      t.columns[c].push_back(std::strtod(p, &endp));
      if (endp == p) {
        std::fclose(f);
        throw IoError("bad row in " + path);
      }
      p = endp;
      if (*p == ',') ++p;
    }
  }
  std::fclose(f);
  return t;
}

// ---- eccdf ----

Eccdf eccdf_from_values(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("eccdf: no values");
  std::sort(values.begin(), values.end());
  Eccdf e;
  e.n = values.size();
  const double inv_n = 1.0 / static_cast<double>(e.n);
  size_t i = 0;
  while (i < values.size()) {
    size_t j = i;
    while (j + 1 < values.size() && values[j + 1] == values[i]) ++j;
    e.value.push_back(values[i]);
    e.tail.push_back(static_cast<double>(values.size() - (j + 1)) * inv_n);
    i = j + 1;
  }
  return e;
}

Eccdf matching_distance_eccdf(const Matching& m) {
  std::vector<double> d;
  d.reserve(m.matched_count());
  for (size_t p = 0; p < m.phi().size(); ++p)
    if (m.partner_of_phi(p) != kUnmatched) d.push_back(m.pair_dist(p));
  if (d.empty()) throw InvalidArgument("eccdf: matching has no matched pairs");
  return eccdf_from_values(std::move(d));
}

Table Eccdf::to_table() const {
  Table t;
  t.meta["n"] = std::to_string(n);
  t.names = {"value", "tail"};
  t.columns = {value, tail};
  return t;
}

// ---- scattering ----

Scattering scattering_intensity(const PointSet& ps, int m_max) {
  if (!ps.box().periodic) throw InvalidArgument("scattering: torus instances only");
  if (ps.size() == 0) throw InvalidArgument("scattering: empty point set");
  if (m_max < 1) throw InvalidArgument("scattering: m_max must be >= 1");
  const int d = ps.dim();
  const double L = ps.box().side;
  const size_t n = ps.size();
  const double two_pi = 2.0 * 3.14159265358979323846;

  // unit phase step per point and axis; mode (m_1..m_d) then needs the product
  // of per-axis steps raised to m_i, which the nested loops accumulate by
  // repeated multiplication instead of calling exp per mode
  std::vector<std::vector<std::complex<double>>> step(
      static_cast<size_t>(d), std::vector<std::complex<double>>(n));
  for (int a = 0; a < d; ++a)
    for (size_t j = 0; j < n; ++j)
      step[static_cast<size_t>(a)][j] = std::polar(1.0, -two_pi * ps.point(j)[a] / L);

  const bool integer_side = L == std::floor(L) && L > 0;
  const int64_t side_int = static_cast<int64_t>(L);

  Scattering out;
  out.dim = d;
  out.side = L;
  size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<size_t>(m_max) + 1;
  out.modes.reserve((total - 1) * static_cast<size_t>(d));
  out.k.reserve(total - 1);
  out.s.reserve(total - 1);
  out.bragg.reserve(total - 1);

  std::vector<std::vector<std::complex<double>>> partial(static_cast<size_t>(d) + 1);
  partial[0].assign(n, {1.0, 0.0});
  int m[kMaxDim] = {0, 0, 0};

  auto rec = [&](auto&& self, int axis) -> void {
    if (axis == d) {
      bool zero = true;
      for (int a = 0; a < d; ++a)
        if (m[a] != 0) zero = false;
      if (zero) return;
      std::complex<double> sum{0.0, 0.0};
      for (const auto& v : partial[static_cast<size_t>(d)]) sum += v;
      double k2 = 0.0;
      bool bragg = integer_side;
      for (int a = 0; a < d; ++a) {
        const double ka = two_pi * m[a] / L;
        k2 += ka * ka;
        out.modes.push_back(m[a]);
        if (integer_side && m[a] % side_int != 0) bragg = false;
      }
      out.k.push_back(std::sqrt(k2));
      out.s.push_back(std::norm(sum) / static_cast<double>(n));
      out.bragg.push_back(bragg ? 1 : 0);
      return;
    }
    auto& cur = partial[static_cast<size_t>(axis) + 1];
    cur = partial[static_cast<size_t>(axis)];
    const auto& st = step[static_cast<size_t>(axis)];
    for (int mi = 0; mi <= m_max; ++mi) {
      m[axis] = mi;
      self(self, axis + 1);
      if (mi < m_max)
        for (size_t j = 0; j < n; ++j) cur[j] *= st[j];
    }
  };
  rec(rec, 0);
  return out;
}

Table Scattering::to_table() const {
  Table t;
  t.meta["d"] = std::to_string(dim);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", side);
  t.meta["L"] = buf;
  for (int a = 0; a < dim; ++a) t.names.push_back("m" + std::to_string(a + 1));
  t.names.push_back("k");
  t.names.push_back("s");
  t.names.push_back("bragg");
  t.columns.assign(t.names.size(), {});
  for (size_t r = 0; r < size(); ++r) {
    for (int a = 0; a < dim; ++a)
      t.columns[static_cast<size_t>(a)].push_back(
          static_cast<double>(modes[r * static_cast<size_t>(dim) + static_cast<size_t>(a)]));
    t.columns[static_cast<size_t>(dim)].push_back(k[r]);
    t.columns[static_cast<size_t>(dim) + 1].push_back(s[r]);
    t.columns[static_cast<size_t>(dim) + 2].push_back(bragg[r]);
  }
  return t;
}

// ---- log binning ----

BinnedCurve log_bin(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<uint8_t>* skip, int bins_per_decade) {
  if (x.size() != y.size()) throw InvalidArgument("log_bin: length mismatch");
  if (bins_per_decade < 1) throw InvalidArgument("log_bin: bins_per_decade must be >= 1");
  double xmin = 0.0, xmax = 0.0;
  bool any = false;
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0 || (skip && (*skip)[i])) continue;
    if (!any || x[i] < xmin) xmin = x[i];
    if (!any || x[i] > xmax) xmax = x[i];
    any = true;
  }
  if (!any) throw InvalidArgument("log_bin: no usable rows");
  const double bpd = static_cast<double>(bins_per_decade);
  const int n_bins =
      1 + static_cast<int>(std::floor(std::log10(xmax / xmin) * bpd + 1e-12));
  std::vector<double> sum(static_cast<size_t>(n_bins), 0.0);
  std::vector<int64_t> cnt(static_cast<size_t>(n_bins), 0);
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0 || (skip && (*skip)[i])) continue;
    int b = static_cast<int>(std::floor(std::log10(x[i] / xmin) * bpd));
    if (b < 0) b = 0;
    if (b >= n_bins) b = n_bins - 1;
    sum[static_cast<size_t>(b)] += y[i];
    ++cnt[static_cast<size_t>(b)];
  }
  BinnedCurve out;
  for (int b = 0; b < n_bins; ++b) {
    if (cnt[static_cast<size_t>(b)] == 0) continue;
    out.x.push_back(xmin * std::pow(10.0, (b + 0.5) / bpd));
    out.y.push_back(sum[static_cast<size_t>(b)] / static_cast<double>(cnt[static_cast<size_t>(b)]));
    out.n.push_back(cnt[static_cast<size_t>(b)]);
  }
  return out;
}

Table BinnedCurve::to_table() const {
  Table t;
  t.names = {"x", "y", "n"};
  t.columns = {x, y, {}};
  t.columns[2].reserve(n.size());
  for (int64_t v : n) t.columns[2].push_back(static_cast<double>(v));
  return t;
}

// ---- number variance ----

NumberVariance number_variance(const PointSet& ps, const std::vector<double>& radii,
                               size_t n_centers, uint64_t seed) {
  if (!ps.box().periodic) throw InvalidArgument("number_variance: torus instances only");
  if (radii.empty()) throw InvalidArgument("number_variance: no radii");
  if (n_centers < 2) throw InvalidArgument("number_variance: need at least two centers");
  std::vector<double> rs = radii;
  std::sort(rs.begin(), rs.end());
  if (!(rs.front() > 0.0) || !(rs.back() < ps.box().side / 2))
    throw InvalidArgument("number_variance: radii must lie in (0, side/2)");

  const int d = ps.dim();
  const size_t nr = rs.size();
  // large query balls want coarse cells (~r_max/40) to keep the cell walk cheap
  int cells = static_cast<int>(40.0 * ps.box().side / rs.back());
  int dflt = static_cast<int>(std::floor(std::pow(static_cast<double>(ps.size()), 1.0 / d)));
  cells = std::clamp(cells, 1, std::max(dflt, 1));
  NeighborIndex grid(ps, cells);
  const double d2max = rs.back() * rs.back();
  Rng rng(seed);

  std::vector<uint32_t> counts(n_centers * nr);
  std::vector<int64_t> diff(nr + 1);
  for (size_t c = 0; c < n_centers; ++c) {
    double center[kMaxDim] = {0, 0, 0};
    for (int a = 0; a < d; ++a) center[a] = rng.uniform(0.0, ps.box().side);
    std::fill(diff.begin(), diff.end(), 0);
    grid.for_each_within(center, d2max, [&](uint32_t, double d2) {
      const double dd = std::sqrt(d2);
      const size_t b = static_cast<size_t>(
          std::lower_bound(rs.begin(), rs.end(), dd) - rs.begin());
      ++diff[b];  // point lies inside every ball with radius >= dd
    });
    int64_t run = 0;
    for (size_t r = 0; r < nr; ++r) {
      run += diff[r];
      counts[c * nr + r] = static_cast<uint32_t>(run);
    }
  }

  NumberVariance out;
  out.centers = n_centers;
  const double nc = static_cast<double>(n_centers);
  for (size_t r = 0; r < nr; ++r) {
    double mean = 0.0;
    for (size_t c = 0; c < n_centers; ++c) mean += counts[c * nr + r];
    mean /= nc;
    double m2 = 0.0, m4 = 0.0;
    for (size_t c = 0; c < n_centers; ++c) {
      const double dev = counts[c * nr + r] - mean;
      const double dev2 = dev * dev;
      m2 += dev2;
      m4 += dev2 * dev2;
    }
    const double var = m2 / (nc - 1.0);
    m2 /= nc;
    m4 /= nc;
    const double var_of_var = (m4 - (nc - 3.0) / (nc - 1.0) * m2 * m2) / nc;
    out.radius.push_back(rs[r]);
    out.mean.push_back(mean);
    out.variance.push_back(var);
    out.se.push_back(var_of_var > 0.0 ? std::sqrt(var_of_var) : 0.0);
  }
  return out;
}

Table NumberVariance::to_table() const {
  Table t;
  t.meta["centers"] = std::to_string(centers);
  t.names = {"radius", "mean", "variance", "se"};
  t.columns = {radius, mean, variance, se};
  return t;
}

// ---- pair correlation ----

PairCorrelation pair_correlation(const PointSet& ps, double r_max, int n_bins) {
  if (!ps.box().periodic) throw InvalidArgument("pair_correlation: torus instances only");
  if (!(r_max > 0.0) || r_max >= ps.box().side / 2)
    throw InvalidArgument("pair_correlation: r_max must lie in (0, side/2)");
  if (n_bins < 1) throw InvalidArgument("pair_correlation: n_bins must be >= 1");
  if (ps.size() < 2) throw InvalidArgument("pair_correlation: need at least two points");

  const int d = ps.dim();
  const double width = r_max / n_bins;
  std::vector<int64_t> cnt(static_cast<size_t>(n_bins), 0);
  NeighborIndex grid(ps);
  const double d2max = r_max * r_max;
  for (size_t i = 0; i < ps.size(); ++i) {
    grid.for_each_within(ps.point(i), d2max, [&](uint32_t j, double d2) {
      if (j == i || d2 == 0.0) return;
      const double dd = std::sqrt(d2);
      int b = static_cast<int>(std::ceil(dd / width)) - 1;
      if (b < 0) b = 0;
      if (b >= n_bins) b = n_bins - 1;
      ++cnt[static_cast<size_t>(b)];
    });
  }

  const double n = static_cast<double>(ps.size());
  double vol = 1.0;
  for (int a = 0; a < d; ++a) vol *= ps.box().side;
  const double rho = n / vol;
  const double kd = unit_ball_volume(d);
  PairCorrelation out;
  for (int b = 0; b < n_bins; ++b) {
    const double r1 = b * width, r2 = (b + 1) * width;
    const double shell = kd * (std::pow(r2, d) - std::pow(r1, d));
    out.r.push_back(0.5 * (r1 + r2));
    out.g.push_back(static_cast<double>(cnt[static_cast<size_t>(b)]) / (n * rho * shell));
  }
  return out;
}

Table PairCorrelation::to_table() const {
  Table t;
  t.names = {"r", "g"};
  t.columns = {r, g};
  return t;
}

// ---- fits ----

namespace {

Fit linfit(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  if (n < 2) throw InvalidArgument("fit: need at least two usable rows");
  double sx = 0, sy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("fit: degenerate abscissa");
  Fit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.n = n;
  const double ss_res = syy - f.slope * sxy;
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

}  // namespace

Fit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidArgument("fit: length mismatch");
  std::vector<double> lx, ly;
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  return linfit(lx, ly);
}

Fit fit_semilog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidArgument("fit: length mismatch");
  std::vector<double> lx, ly;
  for (size_t i = 0; i < x.size(); ++i) {
    if (y[i] > 0.0) {
      lx.push_back(x[i]);
      ly.push_back(std::log(y[i]));
    }
  }
  return linfit(lx, ly);
}

}  // namespace stm
