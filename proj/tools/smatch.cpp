// smatch: experiment driver for the stable-matching toolkit. Every run is a
// pure function of its configuration and seeds; artifacts are CSV tables, a
// summary.json per run, and optional SVG plots. Exit codes: 0 ok, 2 config
// error, 3 budget exhausted, 4 inconclusive recovery.
#include "stablematch.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

using nlohmann::json;

namespace {

struct CliExit {
  int code;
  std::string msg;
};

int status_code(sm_status st) {
  switch (st) {
    case SM_OK: return 0;
    case SM_ERR_BUDGET_EXHAUSTED: return 3;
    case SM_ERR_INCONCLUSIVE: return 4;
    default: return 2;
  }
}

void check(sm_status st, const std::string& what) {
  if (st != SM_OK) throw CliExit{status_code(st), what + ": " + sm_last_error()};
}

struct Ps {
  sm_pointset* p = nullptr;
  Ps() = default;
  explicit Ps(sm_pointset* q) : p(q) {}
  Ps(Ps&& o) noexcept : p(o.p) { o.p = nullptr; }
  Ps& operator=(Ps&& o) noexcept { std::swap(p, o.p); return *this; }
  Ps(const Ps&) = delete;
  ~Ps() { sm_pointset_free(p); }
};
struct Mt {
  sm_matching* p = nullptr;
  ~Mt() { sm_matching_free(p); }
};
struct Fl {
  sm_flower* p = nullptr;
  ~Fl() { sm_flower_free(p); }
};
struct Tb {
  sm_table* p = nullptr;
  ~Tb() { sm_table_free(p); }
};

std::vector<double> column(const sm_table* t, const char* name) {
  std::vector<double> v(sm_table_rows(t));
  check(sm_table_column(t, name, v.data()), std::string("column ") + name);
  return v;
}

// everything a run needs; one instance shared by all subcommands
struct Cfg {
  int d = 2;
  double L = 50.0;
  double alpha = 2.0;
  std::string process = "poisson";  // poisson | dpp | lattice
  std::string shift_mode = "deterministic";
  std::vector<double> offset;
  double shape = 10.0;
  double scale_fraction = 0.9999;
  int trunc = 0;
  std::vector<uint64_t> seeds{1};
  std::string out = ".";
  uint64_t budget = 1000000;
  bool deterministic = true;  // runs are always deterministic; flag kept for the contract
  bool svg = false;

  std::string in_file, phi_file, psi_file, match_file;
  bool audit = false, matched = false, emit_match = false;
  std::string side = "lattice";
  uint64_t index = 0;
  int trials = 20;
  double radius = 2.0;
  bool allow_inconclusive = false;
  int mmax = 200;
  int bins_per_decade = 12;
  double fit_kmax = 0.0;
  double rmin = 1.0, rmax = 0.0;
  int nradii = 24;
  uint64_t windows = 20000;
  double pc_rmax = 0.0;
  int pc_bins = 200;
  std::string preset, scale = "desk";
  bool seeds_given = false;   // presets only override what the user left untouched
  bool alpha_given = false;
  bool mmax_given = false;
};

json config_echo(const Cfg& c, const std::string& sub) {
  json j;
  j["subcommand"] = sub;
  j["d"] = c.d;
  j["L"] = c.L;
  j["alpha"] = c.alpha;
  j["process"] = c.process;
  j["shift_mode"] = c.shift_mode;
  j["seeds"] = c.seeds;
  j["budget"] = c.budget;
  j["deterministic"] = c.deterministic;
  if (c.process == "dpp") {
    j["shape"] = c.shape;
    j["scale_fraction"] = c.scale_fraction;
    j["trunc"] = c.trunc;
  }
  return j;
}

void write_json(const std::string& dir, const json& j) {
  const std::string path = dir + "/summary.json";
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw CliExit{2, "cannot open for writing: " + path};
  const std::string body = j.dump(2);
  std::fwrite(body.data(), 1, body.size(), f);
  std::fputc('\n', f);
  std::fclose(f);
  std::printf("wrote %s\n", path.c_str());
}

// decorrelates the lattice shift stream from the sample stream
constexpr uint64_t kShiftSalt = 0x5851f42d4c957f2dULL;

Ps make_lattice(const Cfg& c, uint64_t seed) {
  if (c.L <= 0 || c.L != std::floor(c.L))
    throw CliExit{2, "lattice side must be a positive integer"};
  const double* off = nullptr;
  if (c.shift_mode == "fixed") {
    if (static_cast<int>(c.offset.size()) != c.d)
      throw CliExit{2, "--offset needs exactly d values with --shift-mode fixed"};
    off = c.offset.data();
  }
  Ps ps;
  check(sm_lattice_create(c.d, static_cast<int64_t>(c.L), c.shift_mode.c_str(), off,
                          seed ^ kShiftSalt, &ps.p),
        "lattice");
  return ps;
}

Ps make_sample(const Cfg& c, uint64_t seed) {
  Ps ps;
  if (c.process == "poisson") {
    check(sm_poisson_create(c.d, c.L, c.alpha, seed, &ps.p), "poisson sample");
  } else if (c.process == "dpp") {
    check(sm_dpp_create(c.d, c.L, c.alpha, c.shape, c.scale_fraction, c.trunc, seed, &ps.p),
          "determinantal sample");
  } else if (c.process == "lattice") {
    ps = make_lattice(c, seed);
  } else {
    throw CliExit{2, "unknown process: " + c.process};
  }
  return ps;
}

Ps read_points(const std::string& path) {
  Ps ps;
  check(sm_pointset_read_csv(path.c_str(), &ps.p), "read " + path);
  return ps;
}

void svg_plot1(const std::string& path, const std::vector<double>& x,
               const std::vector<double>& y, const std::string& title,
               const std::string& xl, const std::string& yl, bool logx, bool logy) {
  const size_t len = x.size();
  const double* xs[1] = {x.data()};
  const double* ys[1] = {y.data()};
  check(sm_svg_plot(path.c_str(), title.c_str(), xl.c_str(), yl.c_str(), logx ? 1 : 0,
                    logy ? 1 : 0, 1, &len, xs, ys, nullptr),
        "svg " + path);
  std::printf("wrote %s\n", path.c_str());
}

std::string seed_name(const std::string& stem, uint64_t seed) {
  return stem + "_s" + std::to_string(seed) + ".csv";
}

void report_csv(const std::string& path) { std::printf("wrote %s\n", path.c_str()); }

// ---- sample ----

int run_sample(Cfg& c) {
  json j;
  j["config"] = config_echo(c, "sample");
  json per;
  for (uint64_t s : c.seeds) {
    Ps ps = make_sample(c, s);
    const std::string path = c.out + "/" + seed_name("sample", s);
    check(sm_pointset_write_csv(ps.p, path.c_str()), "write " + path);
    report_csv(path);
    per[std::to_string(s)] = {{"points", sm_pointset_size(ps.p)}};
  }
  j["results"]["per_seed"] = per;
  if (c.process == "dpp") {
    double expect = 0.0;
    check(sm_dpp_expected_count(c.d, c.L, c.alpha, c.shape, c.scale_fraction, c.trunc, &expect),
          "dpp expected count");
    j["results"]["expected_points"] = expect;
  }
  write_json(c.out, j);
  return 0;
}

// ---- match ----

struct Instance {
  Ps phi, psi;
  Mt m;
};

Instance make_matching(const Cfg& c, uint64_t seed) {
  Instance in;
  if (!c.phi_file.empty() || !c.psi_file.empty()) {
    if (c.phi_file.empty() || c.psi_file.empty())
      throw CliExit{2, "--phi and --psi must be given together"};
    in.phi = read_points(c.phi_file);
    in.psi = read_points(c.psi_file);
  } else {
    in.phi = make_lattice(c, seed);
    in.psi = make_sample(c, seed);
  }
  if (!c.match_file.empty()) {
    check(sm_matching_read_csv(c.match_file.c_str(), in.phi.p, in.psi.p, &in.m.p),
          "read " + c.match_file);
  } else {
    check(sm_match(in.phi.p, in.psi.p, &in.m.p), "match");
  }
  return in;
}

std::vector<double> matched_distances(const sm_matching* m) {
  std::vector<double> d(sm_matching_matched_count(m));
  check(sm_matching_distances(m, d.data()), "distances");
  return d;
}

int run_match(Cfg& c) {
  json j;
  j["config"] = config_echo(c, "match");
  json per;
  std::vector<double> pooled;
  const bool from_files = !c.phi_file.empty();
  if (from_files && c.seeds.size() != 1)
    throw CliExit{2, "file inputs take a single seed"};
  for (uint64_t s : c.seeds) {
    Instance in = make_matching(c, s);
    if (!from_files) {
      const std::string php = c.out + "/" + seed_name("phi", s);
      const std::string psp = c.out + "/" + seed_name("psi", s);
      check(sm_pointset_write_csv(in.phi.p, php.c_str()), "write " + php);
      check(sm_pointset_write_csv(in.psi.p, psp.c_str()), "write " + psp);
      report_csv(php);
      report_csv(psp);
    }
    const std::string mp = c.out + "/" + seed_name("match", s);
    check(sm_matching_write_csv(in.m.p, mp.c_str()), "write " + mp);
    report_csv(mp);
    if (c.matched) {
      Ps m0;
      check(sm_matching_matched_samples(in.m.p, &m0.p), "matched samples");
      const std::string path = c.out + "/" + seed_name("matched_psi", s);
      check(sm_pointset_write_csv(m0.p, path.c_str()), "write " + path);
      report_csv(path);
    }
    json r;
    r["n_phi"] = sm_pointset_size(in.phi.p);
    r["n_psi"] = sm_pointset_size(in.psi.p);
    r["matched"] = sm_matching_matched_count(in.m.p);
    r["rounds"] = sm_matching_round_count(in.m.p);
    if (c.audit) {
      size_t bad = 0;
      check(sm_matching_count_unstable(in.m.p, &bad), "stability audit");
      r["unstable_pairs"] = bad;
    }
    std::vector<double> d = matched_distances(in.m.p);
    if (!d.empty()) {
      r["max_distance"] = *std::max_element(d.begin(), d.end());
      double mean = 0.0;
      for (double v : d) mean += v;
      r["mean_distance"] = mean / static_cast<double>(d.size());
    }
    pooled.insert(pooled.end(), d.begin(), d.end());
    per[std::to_string(s)] = r;
  }
  j["results"]["per_seed"] = per;
  if (c.svg && !pooled.empty()) {
    Tb t;
    check(sm_eccdf_from_values(pooled.data(), pooled.size(), &t.p), "eccdf");
    const std::string ep = c.out + "/eccdf.csv";
    check(sm_table_write_csv(t.p, ep.c_str()), "write " + ep);
    report_csv(ep);
    svg_plot1(c.out + "/eccdf.svg", column(t.p, "value"), column(t.p, "tail"),
              "matched distance tail", "distance", "P(dist > t)", false, true);
  }
  write_json(c.out, j);
  return 0;
}

// ---- queue ----

int run_queue(Cfg& c) {
  if (c.d != 1) throw CliExit{2, "queue runs on the line; set --d 1"};
  json j;
  j["config"] = config_echo(c, "queue");
  json per;
  for (uint64_t s : c.seeds) {
    Ps phi = make_lattice(c, s);
    Ps psi = make_sample(c, s);
    Mt m;
    Tb trace;
    check(sm_one_sided_match(phi.p, psi.p, c.emit_match ? &m.p : nullptr, &trace.p),
          "one-sided match");
    const std::string qp = c.out + "/" + seed_name("queue", s);
    check(sm_table_write_csv(trace.p, qp.c_str()), "write " + qp);
    report_csv(qp);
    if (c.emit_match) {
      const std::string mp = c.out + "/" + seed_name("match", s);
      check(sm_matching_write_csv(m.p, mp.c_str()), "write " + mp);
      report_csv(mp);
    }
    std::vector<double> q = column(trace.p, "queue_len");
    json r;
    r["max_queue"] = q.empty() ? 0.0 : *std::max_element(q.begin(), q.end());
    r["final_queue"] = q.empty() ? 0.0 : q.back();
    per[std::to_string(s)] = r;
    if (c.svg) {
      svg_plot1(c.out + "/queue_s" + std::to_string(s) + ".svg", column(trace.p, "t"), q,
                "waiting lattice points", "t", "queue length", false, false);
    }
  }
  j["results"]["per_seed"] = per;
  write_json(c.out, j);
  return 0;
}

// ---- flower ----

int run_flower(Cfg& c) {
  json j;
  j["config"] = config_echo(c, "flower");
  const uint64_t s = c.seeds.front();
  Instance in = make_matching(c, s);
  const int on_lattice = c.side == "lattice" ? 1 : c.side == "sample" ? 0 : -1;
  if (on_lattice < 0) throw CliExit{2, "--side must be lattice or sample"};
  Fl f;
  check(sm_flower_compute(in.m.p, on_lattice, c.index, c.budget, &f.p), "flower");
  const std::string fp = c.out + "/flower.csv";
  check(sm_flower_write_csv(f.p, fp.c_str()), "write " + fp);
  report_csv(fp);
  json r;
  r["anchor_side"] = c.side;
  r["anchor_index"] = c.index;
  r["balls"] = sm_flower_ball_count(f.p);
  r["sentinel"] = sm_flower_is_sentinel(f.p) != 0;
  r["bounding_radius"] = sm_flower_bounding_radius(f.p);
  const int64_t partner = on_lattice ? sm_matching_partner_of_lattice(in.m.p, c.index)
                                     : sm_matching_partner_of_sample(in.m.p, c.index);
  r["partner_index"] = partner;
  j["results"] = r;
  write_json(c.out, j);
  return 0;
}

// ---- rigidity ----

int run_rigidity(Cfg& c) {
  json j;
  j["config"] = config_echo(c, "rigidity");
  j["config"]["trials"] = c.trials;
  j["config"]["radius"] = c.radius;
  const std::string rp = c.out + "/rigidity.csv";
  std::FILE* f = std::fopen(rp.c_str(), "w");
  if (!f) throw CliExit{2, "cannot open for writing: " + rp};
  std::fprintf(f, "# rigidity d=%d L=%.17g alpha=%.17g radius=%.17g trials=%d\n", c.d, c.L,
               c.alpha, c.radius, c.trials);
  std::fprintf(f, "# seed,trial,center_1..center_d,radius,recovered,truth,conclusive\n");
  size_t total = 0, conclusive = 0, exact = 0;
  for (uint64_t s : c.seeds) {
    Instance in = make_matching(c, s);
    std::mt19937_64 eng(s);
    auto u01 = [&] { return (eng() >> 11) * 0x1.0p-53; };
    for (int t = 0; t < c.trials; ++t) {
      double center[3] = {0, 0, 0};
      for (int a = 0; a < c.d; ++a) center[a] = u01() * c.L;
      int64_t rec = -1, truth = -1;
      const sm_status st = sm_rigidity_recover(in.m.p, center, c.radius, c.budget, &rec, &truth);
      if (st != SM_OK && st != SM_ERR_INCONCLUSIVE) {
        std::fclose(f);
        throw CliExit{status_code(st), std::string("recovery: ") + sm_last_error()};
      }
      ++total;
      const bool ok = st == SM_OK;
      if (ok) {
        ++conclusive;
        if (rec == truth) ++exact;
      }
      std::fprintf(f, "%" PRIu64 ",%d,", s, t);
      for (int a = 0; a < c.d; ++a) std::fprintf(f, "%.17g,", center[a]);
      std::fprintf(f, "%.17g,%lld,%lld,%d\n", c.radius, static_cast<long long>(rec),
                   static_cast<long long>(truth), ok ? 1 : 0);
    }
  }
  std::fclose(f);
  report_csv(rp);
  json r;
  r["trials"] = total;
  r["conclusive"] = conclusive;
  r["exact"] = exact;
  r["inconclusive"] = total - conclusive;
  j["results"] = r;
  write_json(c.out, j);
  if (conclusive != exact) throw CliExit{2, "recovered counts disagree with ground truth"};
  if (total != conclusive && !c.allow_inconclusive)
    throw CliExit{4, std::to_string(total - conclusive) + " trials inconclusive"};
  return 0;
}

// ---- stats helpers ----

// pointsets to analyze: --in file, or one generated sample per seed
std::vector<Ps> stat_inputs(const Cfg& c) {
  std::vector<Ps> v;
  if (!c.in_file.empty()) {
    v.push_back(read_points(c.in_file));
  } else {
    for (uint64_t s : c.seeds) v.push_back(make_sample(c, s));
  }
  return v;
}

json fit_json(double slope, double intercept, double r2, size_t n) {
  return json{{"slope", slope}, {"intercept", intercept}, {"r2", r2}, {"points", n}};
}

int run_stats_eccdf(Cfg& c) {
  json j;
  j["config"] = config_echo(c, "stats eccdf");
  std::vector<double> pooled;
  if (!c.match_file.empty()) {
    Instance in = make_matching(c, c.seeds.front());
    pooled = matched_distances(in.m.p);
  } else {
    for (uint64_t s : c.seeds) {
      Instance in = make_matching(c, s);
      std::vector<double> d = matched_distances(in.m.p);
      pooled.insert(pooled.end(), d.begin(), d.end());
    }
  }
  if (pooled.empty()) throw CliExit{2, "no matched pairs to summarize"};
  Tb t;
  check(sm_eccdf_from_values(pooled.data(), pooled.size(), &t.p), "eccdf");
  const std::string ep = c.out + "/eccdf.csv";
  check(sm_table_write_csv(t.p, ep.c_str()), "write " + ep);
  report_csv(ep);
  std::vector<double> value = column(t.p, "value");
  std::vector<double> tail = column(t.p, "tail");
  json r;
  r["pairs"] = pooled.size();
  r["max_distance"] = value.back();
  // exponential tail: fit log tail against distance where the tail is resolved
  std::vector<double> fx, fy;
  for (size_t i = 0; i < value.size(); ++i)
    if (tail[i] >= 1e-4 && tail[i] <= 1e-1) {
      fx.push_back(value[i]);
      fy.push_back(tail[i]);
    }
  if (fx.size() < 2) {
    fx = value;
    fy = tail;
    for (size_t i = 0; i < fy.size(); ++i)
      if (fy[i] <= 0.0) {
        fx.resize(i);
        fy.resize(i);
        break;
      }
  }
  if (fx.size() >= 2) {
    double slope = 0, inter = 0, r2 = 0;
    check(sm_fit_semilog(fx.data(), fy.data(), fx.size(), &slope, &inter, &r2), "tail fit");
    r["tail_fit"] = fit_json(slope, inter, r2, fx.size());
  }
  j["results"] = r;
  if (c.svg)
    svg_plot1(c.out + "/eccdf.svg", value, tail, "matched distance tail", "distance",
              "P(dist > t)", false, true);
  write_json(c.out, j);
  return 0;
}

int run_stats_scattering(Cfg& c) {
  json j;
  j["config"] = config_echo(c, "stats scattering");
  j["config"]["mmax"] = c.mmax;
  std::vector<Ps> inputs = stat_inputs(c);
  std::vector<double> k_all, s_all;
  std::vector<uint8_t> skip_all;
  size_t idx = 0;
  for (Ps& ps : inputs) {
    Tb t;
    check(sm_scattering(ps.p, c.mmax, &t.p), "scattering");
    const uint64_t s = c.in_file.empty() ? c.seeds[idx] : 0;
    const std::string path = c.out + "/" + seed_name("scattering", s);
    check(sm_table_write_csv(t.p, path.c_str()), "write " + path);
    report_csv(path);
    std::vector<double> k = column(t.p, "k");
    std::vector<double> sv = column(t.p, "s");
    std::vector<double> b = column(t.p, "bragg");
    k_all.insert(k_all.end(), k.begin(), k.end());
    s_all.insert(s_all.end(), sv.begin(), sv.end());
    for (double v : b) skip_all.push_back(v != 0.0 ? 1 : 0);
    ++idx;
  }
  Tb binned;
  check(sm_log_bin(k_all.data(), s_all.data(), skip_all.data(), k_all.size(),
                   c.bins_per_decade, &binned.p),
        "binning");
  const std::string bp = c.out + "/scattering_binned.csv";
  check(sm_table_write_csv(binned.p, bp.c_str()), "write " + bp);
  report_csv(bp);
  std::vector<double> bx = column(binned.p, "x");
  std::vector<double> by = column(binned.p, "y");
  json r;
  r["modes_per_run"] = k_all.size() / inputs.size();
  r["runs"] = inputs.size();
  std::vector<double> fx, fy;
  for (size_t i = 0; i < bx.size(); ++i)
    if (c.fit_kmax <= 0.0 || bx[i] <= c.fit_kmax) {
      fx.push_back(bx[i]);
      fy.push_back(by[i]);
    }
  if (fx.size() >= 2) {
    double slope = 0, inter = 0, r2 = 0;
    check(sm_fit_power_law(fx.data(), fy.data(), fx.size(), &slope, &inter, &r2), "power fit");
    r["power_fit"] = fit_json(slope, inter, r2, fx.size());
    r["power_fit"]["prefactor"] = std::exp(inter);
  }
  j["results"] = r;
  if (c.svg)
    svg_plot1(c.out + "/scattering.svg", bx, by, "scattering intensity", "k", "S(k)", true, true);
  write_json(c.out, j);
  return 0;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> v;
  if (n < 2 || !(hi > lo)) throw CliExit{2, "bad radius range"};
  for (int i = 0; i < n; ++i)
    v.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return v;
}

int run_stats_numvar(Cfg& c) {
  json j;
  j["config"] = config_echo(c, "stats numvar");
  std::vector<Ps> inputs = stat_inputs(c);
  const double side = sm_pointset_side(inputs.front().p);
  const double rmax = c.rmax > 0.0 ? c.rmax : 0.48 * side;
  std::vector<double> radii = log_spaced(c.rmin, rmax, c.nradii);
  j["config"]["windows"] = c.windows;
  j["config"]["radii"] = {{"min", c.rmin}, {"max", rmax}, {"count", c.nradii}};
  const size_t nr = radii.size();
  std::vector<double> mean(nr, 0.0), var(nr, 0.0), se2(nr, 0.0);
  size_t idx = 0;
  for (Ps& ps : inputs) {
    Tb t;
    const uint64_t s = c.in_file.empty() ? c.seeds[idx] : c.seeds.front();
    check(sm_number_variance(ps.p, radii.data(), nr, c.windows, s, &t.p), "number variance");
    std::vector<double> m = column(t.p, "mean");
    std::vector<double> v = column(t.p, "variance");
    std::vector<double> e = column(t.p, "se");
    for (size_t i = 0; i < nr; ++i) {
      mean[i] += m[i];
      var[i] += v[i];
      se2[i] += e[i] * e[i];
    }
    ++idx;
  }
  const double runs = static_cast<double>(inputs.size());
  std::vector<double> se(nr);
  for (size_t i = 0; i < nr; ++i) {
    mean[i] /= runs;
    var[i] /= runs;
    se[i] = std::sqrt(se2[i]) / runs;
  }
  const std::string np = c.out + "/numvar.csv";
  std::FILE* f = std::fopen(np.c_str(), "w");
  if (!f) throw CliExit{2, "cannot open for writing: " + np};
  std::fprintf(f, "# numvar runs=%zu centers_per_run=%" PRIu64 " side=%.17g\n", inputs.size(),
               c.windows, side);
  std::fprintf(f, "# radius,mean,variance,se\n");
  for (size_t i = 0; i < nr; ++i)
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", radii[i], mean[i], var[i], se[i]);
  std::fclose(f);
  report_csv(np);
  json r;
  r["var_over_mean_at_rmax"] = var.back() / mean.back();
  double slope = 0, inter = 0, r2 = 0;
  check(sm_fit_power_law(radii.data(), var.data(), nr, &slope, &inter, &r2), "variance fit");
  r["power_fit"] = fit_json(slope, inter, r2, nr);
  j["results"] = r;
  if (c.svg)
    svg_plot1(c.out + "/numvar.svg", radii, var, "count variance", "R", "Var N(R)", true, true);
  write_json(c.out, j);
  return 0;
}

int run_stats_paircorr(Cfg& c) {
  json j;
  j["config"] = config_echo(c, "stats paircorr");
  std::vector<Ps> inputs = stat_inputs(c);
  const double side = sm_pointset_side(inputs.front().p);
  const double rmax = c.pc_rmax > 0.0 ? c.pc_rmax : std::min(10.0, 0.45 * side);
  j["config"]["rmax"] = rmax;
  j["config"]["bins"] = c.pc_bins;
  std::vector<double> r_axis, g_mean;
  for (Ps& ps : inputs) {
    Tb t;
    check(sm_pair_correlation(ps.p, rmax, c.pc_bins, &t.p), "pair correlation");
    std::vector<double> g = column(t.p, "g");
    if (g_mean.empty()) {
      r_axis = column(t.p, "r");
      g_mean.assign(g.size(), 0.0);
    }
    for (size_t i = 0; i < g.size(); ++i) g_mean[i] += g[i];
  }
  for (double& v : g_mean) v /= static_cast<double>(inputs.size());
  const std::string pp = c.out + "/paircorr.csv";
  std::FILE* f = std::fopen(pp.c_str(), "w");
  if (!f) throw CliExit{2, "cannot open for writing: " + pp};
  std::fprintf(f, "# paircorr runs=%zu rmax=%.17g bins=%d\n", inputs.size(), rmax, c.pc_bins);
  std::fprintf(f, "# r,g\n");
  for (size_t i = 0; i < r_axis.size(); ++i)
    std::fprintf(f, "%.17g,%.17g\n", r_axis[i], g_mean[i]);
  std::fclose(f);
  report_csv(pp);
  double dev = 0.0;
  size_t n_tail = 0;
  for (size_t i = 0; i < r_axis.size(); ++i)
    if (r_axis[i] > rmax / 2) {
      dev = std::max(dev, std::fabs(g_mean[i] - 1.0));
      ++n_tail;
    }
  json r;
  r["max_abs_dev_tail"] = dev;
  r["tail_bins"] = n_tail;
  j["results"] = r;
  if (c.svg)
    svg_plot1(c.out + "/paircorr.svg", r_axis, g_mean, "pair correlation", "r", "g(r)", false,
              false);
  write_json(c.out, j);
  return 0;
}

// ---- repro presets ----

// canned parameter sets; desk scale trims the published runs to minutes
struct Preset {
  int d;
  double L;
  double alpha;
  std::string process = "poisson";
  int seeds;
  int mmax = 0;
  uint64_t windows = 0;
  double fit_lo = 0.0, fit_hi = 0.0;     // numvar small-R window
  double fit_lo2 = 0.0, fit_hi2 = 0.0;   // numvar large-R window
};

Preset preset_for(const std::string& name, const std::string& scale, double alpha,
                  const std::string& process) {
  const bool desk = scale == "desk";
  if (scale != "desk" && scale != "paper") throw CliExit{2, "--scale must be desk or paper"};
  if (name == "fig4-3d") {
    Preset p{3, 22, alpha > 0 ? alpha : 2.0, process.empty() ? "poisson" : process,
             desk ? 20 : 100};
    if (p.process == "dpp") {
      // smaller boxes keep the determinantal sampler affordable at high intensity
      p.L = p.alpha < 1.5 ? 10 : p.alpha < 6 ? 8 : 5;
    }
    return p;
  }
  if (name == "fig5-1d") {
    Preset p{1, desk ? 1e5 : 1e6, alpha > 0 ? alpha : 1.01, "poisson", 10};
    p.mmax = desk ? 2000 : 20000;
    return p;
  }
  if (name == "fig5-2d") {
    Preset p{2, desk ? 150.0 : 300.0, alpha > 0 ? alpha : 11.0, "poisson", 10};
    p.mmax = desk ? 150 : 300;
    return p;
  }
  if (name == "fig7-2d") {
    Preset p{2, desk ? 500.0 : 1000.0, alpha > 0 ? alpha : 1.01, "poisson", desk ? 5 : 10};
    p.windows = desk ? 100000 : 1000000;
    p.fit_lo = 1.0;
    p.fit_hi = 10.0;
    p.fit_lo2 = desk ? 50.0 : 100.0;
    p.fit_hi2 = desk ? 120.0 : 300.0;
    return p;
  }
  throw CliExit{2, "unknown preset: " + name +
                       " (expected fig4-3d, fig5-1d, fig5-2d or fig7-2d)"};
}

// matched sample set of one generated instance
Ps matched_set(const Cfg& c, uint64_t seed) {
  Ps phi = make_lattice(c, seed);
  Ps psi = make_sample(c, seed);
  Mt m;
  check(sm_match(phi.p, psi.p, &m.p), "match");
  Ps out;
  check(sm_matching_matched_samples(m.p, &out.p), "matched samples");
  return out;
}

int run_repro(Cfg& c) {
  Preset p = preset_for(c.preset, c.scale, c.alpha_given ? c.alpha : 0.0,
                        c.process == "poisson" ? "" : c.process);
  Cfg rc = c;
  rc.d = p.d;
  rc.L = p.L;
  rc.alpha = p.alpha;
  rc.process = p.process;
  if (!c.seeds_given) {
    rc.seeds.clear();
    for (int i = 1; i <= p.seeds; ++i) rc.seeds.push_back(static_cast<uint64_t>(i));
  }

  json j;
  j["config"] = config_echo(rc, "repro " + c.preset);
  j["config"]["scale"] = c.scale;

  if (c.preset == "fig4-3d") {
    std::vector<double> pooled;
    for (uint64_t s : rc.seeds) {
      Ps phi = make_lattice(rc, s);
      Ps psi = make_sample(rc, s);
      Mt m;
      check(sm_match(phi.p, psi.p, &m.p), "match");
      std::vector<double> d = matched_distances(m.p);
      pooled.insert(pooled.end(), d.begin(), d.end());
    }
    Tb t;
    check(sm_eccdf_from_values(pooled.data(), pooled.size(), &t.p), "eccdf");
    const std::string ep = c.out + "/fig4_eccdf.csv";
    check(sm_table_write_csv(t.p, ep.c_str()), "write " + ep);
    report_csv(ep);
    std::vector<double> value = column(t.p, "value");
    std::vector<double> tail = column(t.p, "tail");
    svg_plot1(c.out + "/fig4_eccdf.svg", value, tail, "matched distance tail", "distance",
              "P(dist > t)", false, true);
    std::vector<double> fx, fy;
    for (size_t i = 0; i < value.size(); ++i)
      if (tail[i] >= 1e-4 && tail[i] <= 1e-1) {
        fx.push_back(value[i]);
        fy.push_back(tail[i]);
      }
    json r;
    r["pairs"] = pooled.size();
    if (fx.size() >= 2) {
      double slope = 0, inter = 0, r2 = 0;
      check(sm_fit_semilog(fx.data(), fy.data(), fx.size(), &slope, &inter, &r2), "tail fit");
      r["tail_fit"] = fit_json(slope, inter, r2, fx.size());
    }
    j["results"] = r;
  } else if (c.preset == "fig5-1d" || c.preset == "fig5-2d") {
    const int mmax = c.mmax_given ? c.mmax : p.mmax;
    j["config"]["mmax"] = mmax;
    std::vector<double> k_all, s_all;
    std::vector<uint8_t> skip_all;
    for (uint64_t s : rc.seeds) {
      Ps m0 = matched_set(rc, s);
      Tb t;
      check(sm_scattering(m0.p, mmax, &t.p), "scattering");
      std::vector<double> k = column(t.p, "k");
      std::vector<double> sv = column(t.p, "s");
      std::vector<double> b = column(t.p, "bragg");
      k_all.insert(k_all.end(), k.begin(), k.end());
      s_all.insert(s_all.end(), sv.begin(), sv.end());
      for (double v : b) skip_all.push_back(v != 0.0 ? 1 : 0);
    }
    Tb binned;
    check(sm_log_bin(k_all.data(), s_all.data(), skip_all.data(), k_all.size(),
                     c.bins_per_decade, &binned.p),
          "binning");
    const std::string bp = c.out + "/fig5_scattering.csv";
    check(sm_table_write_csv(binned.p, bp.c_str()), "write " + bp);
    report_csv(bp);
    std::vector<double> bx = column(binned.p, "x");
    std::vector<double> by = column(binned.p, "y");
    svg_plot1(c.out + "/fig5_scattering.svg", bx, by, "scattering of the matched set", "k",
              "S(k)", true, true);
    // quadratic small-k law: fit the lowest decade of the binned curve
    std::vector<double> fx, fy;
    for (size_t i = 0; i < bx.size(); ++i)
      if (bx[i] <= bx.front() * 10.0) {
        fx.push_back(bx[i]);
        fy.push_back(by[i]);
      }
    json r;
    if (fx.size() >= 2) {
      double slope = 0, inter = 0, r2 = 0;
      check(sm_fit_power_law(fx.data(), fy.data(), fx.size(), &slope, &inter, &r2),
            "power fit");
      r["small_k_fit"] = fit_json(slope, inter, r2, fx.size());
      r["small_k_fit"]["prefactor"] = std::exp(inter);
    }
    j["results"] = r;
  } else {  // fig7-2d
    j["config"]["windows"] = p.windows;
    std::vector<double> radii = log_spaced(1.0, p.fit_hi2, 25);
    const size_t nr = radii.size();
    std::vector<double> mean(nr, 0.0), var(nr, 0.0), se2(nr, 0.0);
    for (uint64_t s : rc.seeds) {
      Ps m0 = matched_set(rc, s);
      Tb t;
      check(sm_number_variance(m0.p, radii.data(), nr, p.windows, s, &t.p), "number variance");
      std::vector<double> m = column(t.p, "mean");
      std::vector<double> v = column(t.p, "variance");
      std::vector<double> e = column(t.p, "se");
      for (size_t i = 0; i < nr; ++i) {
        mean[i] += m[i];
        var[i] += v[i];
        se2[i] += e[i] * e[i];
      }
    }
    const double runs = static_cast<double>(rc.seeds.size());
    const std::string np = c.out + "/fig7_numvar.csv";
    std::FILE* f = std::fopen(np.c_str(), "w");
    if (!f) throw CliExit{2, "cannot open for writing: " + np};
    std::fprintf(f, "# numvar runs=%zu centers_per_run=%" PRIu64 " side=%.17g\n",
                 rc.seeds.size(), p.windows, rc.L);
    std::fprintf(f, "# radius,mean,variance,se\n");
    for (size_t i = 0; i < nr; ++i) {
      mean[i] /= runs;
      var[i] /= runs;
      std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", radii[i], mean[i], var[i],
                   std::sqrt(se2[i]) / runs);
    }
    std::fclose(f);
    report_csv(np);
    svg_plot1(c.out + "/fig7_numvar.svg", radii, var, "count variance of the matched set", "R",
              "Var N(R)", true, true);
    json r;
    auto window_fit = [&](double lo, double hi) {
      std::vector<double> fx, fy;
      for (size_t i = 0; i < nr; ++i)
        if (radii[i] >= lo && radii[i] <= hi) {
          fx.push_back(radii[i]);
          fy.push_back(var[i]);
        }
      double slope = 0, inter = 0, r2 = 0;
      check(sm_fit_power_law(fx.data(), fy.data(), fx.size(), &slope, &inter, &r2),
            "variance fit");
      return fit_json(slope, inter, r2, fx.size());
    };
    r["small_R_fit"] = window_fit(p.fit_lo, p.fit_hi);
    r["large_R_fit"] = window_fit(p.fit_lo2, p.fit_hi2);
    j["results"] = r;
  }
  write_json(c.out, j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Cfg cfg;
  CLI::App app{"stable partial matchings between a lattice and a sampled point process"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file; [section] per subcommand");

  auto add_common = [&](CLI::App* c, bool with_process = true) {
    c->add_option("--d", cfg.d, "dimension (1..3)")->check(CLI::Range(1, 3));
    c->add_option("--L", cfg.L, "box side");
    c->add_option("--alpha", cfg.alpha, "sample intensity")
        ->each([&cfg](const std::string&) { cfg.alpha_given = true; });
    if (with_process)
      c->add_option("--process", cfg.process, "poisson | dpp | lattice")
          ->check(CLI::IsMember({"poisson", "dpp", "lattice"}));
    c->add_option("--shift-mode", cfg.shift_mode, "lattice shift: deterministic | fixed | stationary")
        ->check(CLI::IsMember({"deterministic", "fixed", "stationary"}));
    c->add_option("--offset", cfg.offset, "lattice shift for --shift-mode fixed")
        ->delimiter(',');
    c->add_option("--shape", cfg.shape, "spectral shape exponent (dpp)");
    c->add_option("--scale-fraction", cfg.scale_fraction, "spectral scale fraction (dpp)");
    c->add_option("--trunc", cfg.trunc, "spectral mode cutoff, 0 = automatic (dpp)");
    c->add_option("--seed", [&cfg](const std::vector<std::string>& v) {
        cfg.seeds = {std::stoull(v.front())};
        cfg.seeds_given = true;
        return true;
      }, "single seed")->type_name("UINT");
    c->add_option("--seeds", cfg.seeds, "seed list")
        ->delimiter(',')
        ->each([&cfg](const std::string&) { cfg.seeds_given = true; });
    c->add_option("--out", cfg.out, "output directory");
    c->add_option("--budget", cfg.budget, "node budget for certificate searches");
    c->add_flag("--deterministic,!--no-deterministic", cfg.deterministic,
                "fixed seed fan-out (always on; flag kept for compatibility)");
    c->add_flag("--svg", cfg.svg, "emit SVG plots");
  };

  CLI::App* sample = app.add_subcommand("sample", "draw a point configuration");
  add_common(sample);

  CLI::App* match = app.add_subcommand("match", "two-sided matching with optional audit");
  add_common(match);
  match->add_option("--phi", cfg.phi_file, "lattice-side point CSV");
  match->add_option("--psi", cfg.psi_file, "sample-side point CSV");
  match->add_flag("--audit", cfg.audit, "count pairs that would defect");
  match->add_flag("--matched", cfg.matched, "also write the matched sample subset");

  CLI::App* queue = app.add_subcommand("queue", "one-sided matching on the line");
  add_common(queue);
  queue->add_flag("--emit-match", cfg.emit_match, "also write the matching CSV");

  CLI::App* flower = app.add_subcommand("flower", "certification flower for one anchor");
  add_common(flower);
  flower->add_option("--phi", cfg.phi_file, "lattice-side point CSV");
  flower->add_option("--psi", cfg.psi_file, "sample-side point CSV");
  flower->add_option("--match-file", cfg.match_file, "matching CSV to reuse");
  flower->add_option("--side", cfg.side, "anchor side: lattice | sample")
      ->check(CLI::IsMember({"lattice", "sample"}));
  flower->add_option("--index", cfg.index, "anchor index");

  CLI::App* rigidity = app.add_subcommand("rigidity", "count recovery from punctured data");
  add_common(rigidity);
  rigidity->add_option("--trials", cfg.trials, "deletion balls per seed")
      ->check(CLI::PositiveNumber);
  rigidity->add_option("--radius", cfg.radius, "deletion ball radius")
      ->check(CLI::PositiveNumber);
  rigidity->add_flag("--allow-inconclusive", cfg.allow_inconclusive,
                     "exit 0 even when some trials stay undecided");

  CLI::App* stats = app.add_subcommand("stats", "estimators on samples or files");
  stats->require_subcommand(1);
  CLI::App* st_ecc = stats->add_subcommand("eccdf", "matched distance tail");
  add_common(st_ecc);
  st_ecc->add_option("--phi", cfg.phi_file, "lattice-side point CSV");
  st_ecc->add_option("--psi", cfg.psi_file, "sample-side point CSV");
  st_ecc->add_option("--match-file", cfg.match_file, "matching CSV to reuse");
  CLI::App* st_sc = stats->add_subcommand("scattering", "structure factor on torus modes");
  add_common(st_sc);
  st_sc->add_option("--in", cfg.in_file, "point CSV to analyze");
  st_sc->add_option("--mmax", cfg.mmax, "largest mode index per axis")
      ->check(CLI::PositiveNumber);
  st_sc->add_option("--bins-per-decade", cfg.bins_per_decade, "log-bin resolution")
      ->check(CLI::PositiveNumber);
  st_sc->add_option("--fit-kmax", cfg.fit_kmax, "restrict the power fit to k <= this");
  CLI::App* st_nv = stats->add_subcommand("numvar", "count variance in random balls");
  add_common(st_nv);
  st_nv->add_option("--in", cfg.in_file, "point CSV to analyze");
  st_nv->add_option("--rmin", cfg.rmin, "smallest ball radius")->check(CLI::PositiveNumber);
  st_nv->add_option("--rmax", cfg.rmax, "largest ball radius, 0 = auto");
  st_nv->add_option("--nradii", cfg.nradii, "number of log-spaced radii")
      ->check(CLI::Range(2, 1000));
  st_nv->add_option("--windows", cfg.windows, "sampling windows per run")
      ->check(CLI::PositiveNumber);
  CLI::App* st_pc = stats->add_subcommand("paircorr", "pair correlation");
  add_common(st_pc);
  st_pc->add_option("--in", cfg.in_file, "point CSV to analyze");
  st_pc->add_option("--rmax", cfg.pc_rmax, "largest pair distance, 0 = auto");
  st_pc->add_option("--bins", cfg.pc_bins, "number of shells")->check(CLI::PositiveNumber);

  CLI::App* repro = app.add_subcommand("repro", "canned figure reproductions");
  add_common(repro);
  repro->add_option("preset", cfg.preset, "fig4-3d | fig5-1d | fig5-2d | fig7-2d")
      ->required();
  repro->add_option("--scale", cfg.scale, "desk | paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  repro->add_option("--mmax", cfg.mmax, "override the preset mode cutoff")
      ->each([&cfg](const std::string&) { cfg.mmax_given = true; });
  repro->add_option("--bins-per-decade", cfg.bins_per_decade, "log-bin resolution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec) throw CliExit{2, "cannot create output directory: " + cfg.out};
    if (cfg.seeds.empty()) throw CliExit{2, "no seeds given"};
    if (sample->parsed()) return run_sample(cfg);
    if (match->parsed()) return run_match(cfg);
    if (queue->parsed()) return run_queue(cfg);
    if (flower->parsed()) return run_flower(cfg);
    if (rigidity->parsed()) return run_rigidity(cfg);
    if (stats->parsed()) {
      if (st_ecc->parsed()) return run_stats_eccdf(cfg);
      if (st_sc->parsed()) return run_stats_scattering(cfg);
      if (st_nv->parsed()) return run_stats_numvar(cfg);
      if (st_pc->parsed()) return run_stats_paircorr(cfg);
    }
    if (repro->parsed()) return run_repro(cfg);
    throw CliExit{2, "no subcommand"};
  } catch (const CliExit& e) {
    std::fprintf(stderr, "smatch: %s\n", e.msg.c_str());
    return e.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "smatch: %s\n", e.what());
    return 2;
  }
}
