#include "stablematch.h"

#include <cstdio>
#include <cstring>
#include <memory>
#include <string>

#include "core/errors.hpp"
#include "core/flower.hpp"
#include "core/matching.hpp"
#include "core/pointset.hpp"
#include "core/samplers.hpp"
#include "core/stats.hpp"
#include "core/svg.hpp"

struct sm_pointset {
  std::shared_ptr<const stm::PointSet> p;
};
struct sm_matching {
  stm::Matching m;
};
struct sm_flower {
  stm::Flower f;
  stm::Box box;
};
struct sm_table {
  stm::Table t;
};

namespace {

thread_local std::string g_error;

template <typename F>
sm_status guard(F&& fn) {
  try {
    g_error.clear();
    return fn();
  } catch (const stm::InvalidArgument& e) {
    g_error = e.what();
    return SM_ERR_INVALID_ARGUMENT;
  } catch (const stm::BudgetExhausted& e) {
    g_error = e.what();
    return SM_ERR_BUDGET_EXHAUSTED;
  } catch (const stm::Inconclusive& e) {
    g_error = e.what();
    return SM_ERR_INCONCLUSIVE;
  } catch (const stm::IoError& e) {
    g_error = e.what();
    return SM_ERR_IO;
  } catch (const std::exception& e) {
    g_error = e.what();
    return SM_ERR_INTERNAL;
  }
}

sm_status bad_arg(const char* what) {
  g_error = what;
  return SM_ERR_INVALID_ARGUMENT;
}

sm_table* wrap(stm::Table t) { return new sm_table{std::move(t)}; }

}  // namespace

extern "C" {

const char* sm_version(void) { return "1.0.0"; }

const char* sm_last_error(void) { return g_error.c_str(); }

/* ---- point configurations ---- */

sm_status sm_lattice_create(int dim, int64_t side, const char* shift_mode,
                            const double* offset, uint64_t seed, sm_pointset** out) {
  if (!out || !shift_mode) return bad_arg("lattice: null argument");
  return guard([&] {
    stm::LatticeSpec spec;
    spec.dim = dim;
    spec.side = side;
    spec.seed = seed;
    const std::string mode(shift_mode);
    if (mode == "deterministic") {
      spec.mode = stm::ShiftMode::deterministic;
    } else if (mode == "fixed") {
      if (!offset) throw stm::InvalidArgument("lattice: fixed shift needs an offset");
      spec.mode = stm::ShiftMode::fixed;
      for (int i = 0; i < dim && i < stm::kMaxDim; ++i)
        spec.offset[static_cast<size_t>(i)] = offset[i];
    } else if (mode == "stationary") {
      spec.mode = stm::ShiftMode::stationary;
    } else {
      throw stm::InvalidArgument("lattice: unknown shift mode " + mode);
    }
    *out = new sm_pointset{std::make_shared<stm::PointSet>(stm::make_lattice(spec))};
    return SM_OK;
  });
}

sm_status sm_poisson_create(int dim, double side, double alpha, uint64_t seed,
                            sm_pointset** out) {
  if (!out) return bad_arg("poisson: null out");
  return guard([&] {
    *out = new sm_pointset{
        std::make_shared<stm::PointSet>(stm::sample_poisson(dim, side, alpha, seed))};
    return SM_OK;
  });
}

sm_status sm_dpp_create(int dim, double side, double alpha, double shape,
                        double scale_fraction, int trunc, uint64_t seed,
                        sm_pointset** out) {
  if (!out) return bad_arg("dpp: null out");
  return guard([&] {
    const stm::SpectralModel model =
        stm::make_spectral_model(dim, side, alpha, shape, scale_fraction, trunc);
    *out = new sm_pointset{std::make_shared<stm::PointSet>(stm::sample_dpp(model, seed))};
    return SM_OK;
  });
}

sm_status sm_dpp_expected_count(int dim, double side, double alpha, double shape,
                                double scale_fraction, int trunc, double* out) {
  if (!out) return bad_arg("dpp: null out");
  return guard([&] {
    *out = stm::make_spectral_model(dim, side, alpha, shape, scale_fraction, trunc).eigen_sum;
    return SM_OK;
  });
}

sm_status sm_pointset_from_coords(int dim, double side, int periodic, const char* label,
                                  const double* coords, size_t n, uint64_t seed,
                                  sm_pointset** out) {
  if (!out || !label || (!coords && n > 0)) return bad_arg("pointset: null argument");
  return guard([&] {
    stm::Box box{dim, side, periodic != 0};
    std::vector<double> c(coords, coords + n * static_cast<size_t>(dim));
    *out = new sm_pointset{std::make_shared<stm::PointSet>(
        box, std::move(c), stm::point_label_from_string(label), seed)};
    return SM_OK;
  });
}

void sm_pointset_free(sm_pointset* ps) { delete ps; }

size_t sm_pointset_size(const sm_pointset* ps) { return ps ? ps->p->size() : 0; }

int sm_pointset_dim(const sm_pointset* ps) { return ps ? ps->p->dim() : 0; }

double sm_pointset_side(const sm_pointset* ps) { return ps ? ps->p->box().side : 0.0; }

sm_status sm_pointset_coords(const sm_pointset* ps, double* out) {
  if (!ps || !out) return bad_arg("pointset: null argument");
  std::memcpy(out, ps->p->coords().data(), ps->p->coords().size() * sizeof(double));
  g_error.clear();
  return SM_OK;
}

sm_status sm_pointset_write_csv(const sm_pointset* ps, const char* path) {
  if (!ps || !path) return bad_arg("pointset: null argument");
  return guard([&] {
    ps->p->write_csv(path);
    return SM_OK;
  });
}

sm_status sm_pointset_read_csv(const char* path, sm_pointset** out) {
  if (!out || !path) return bad_arg("pointset: null argument");
  return guard([&] {
    *out = new sm_pointset{std::make_shared<stm::PointSet>(stm::PointSet::read_csv(path))};
    return SM_OK;
  });
}

/* ---- matching ---- */

sm_status sm_match(const sm_pointset* lattice, const sm_pointset* samples,
                   sm_matching** out) {
  if (!lattice || !samples || !out) return bad_arg("match: null argument");
  return guard([&] {
    *out = new sm_matching{stm::stable_match(lattice->p, samples->p)};
    return SM_OK;
  });
}

sm_status sm_match_brute_force(const sm_pointset* lattice, const sm_pointset* samples,
                               sm_matching** out) {
  if (!lattice || !samples || !out) return bad_arg("match: null argument");
  return guard([&] {
    *out = new sm_matching{stm::brute_force_match(lattice->p, samples->p)};
    return SM_OK;
  });
}

sm_status sm_one_sided_match(const sm_pointset* lattice, const sm_pointset* samples,
                             sm_matching** out_match, sm_table** out_trace) {
  if (!lattice || !samples) return bad_arg("match: null argument");
  return guard([&] {
    auto [m, trace] = stm::one_sided_match(lattice->p, samples->p);
    if (out_match) *out_match = new sm_matching{std::move(m)};
    if (out_trace) {
      stm::Table t;
      t.meta["span"] = std::to_string(trace.queue_len.empty() ? 0 : trace.queue_len.size() - 1);
      t.meta["n_phi"] = std::to_string(lattice->p->size());
      t.meta["n_psi"] = std::to_string(samples->p->size());
      t.names = {"t", "queue_len"};
      t.columns.assign(2, {});
      for (size_t i = 0; i < trace.queue_len.size(); ++i) {
        t.columns[0].push_back(static_cast<double>(i));
        t.columns[1].push_back(static_cast<double>(trace.queue_len[i]));
      }
      *out_trace = wrap(std::move(t));
    }
    return SM_OK;
  });
}

void sm_matching_free(sm_matching* m) { delete m; }

size_t sm_matching_matched_count(const sm_matching* m) {
  return m ? m->m.matched_count() : 0;
}

int32_t sm_matching_round_count(const sm_matching* m) { return m ? m->m.round_count() : 0; }

int64_t sm_matching_partner_of_lattice(const sm_matching* m, size_t i) {
  if (!m || i >= m->m.phi().size()) return -1;
  return m->m.partner_of_phi(i);
}

int64_t sm_matching_partner_of_sample(const sm_matching* m, size_t i) {
  if (!m || i >= m->m.psi().size()) return -1;
  return m->m.partner_of_psi(i);
}

int32_t sm_matching_round_of_lattice(const sm_matching* m, size_t i) {
  if (!m || i >= m->m.phi().size()) return -1;
  return m->m.round_of_phi(i);
}

sm_status sm_matching_distances(const sm_matching* m, double* out) {
  if (!m || !out) return bad_arg("matching: null argument");
  return guard([&] {
    const std::vector<double> d = m->m.displacement_norms();
    std::memcpy(out, d.data(), d.size() * sizeof(double));
    return SM_OK;
  });
}

sm_status sm_matching_count_unstable(const sm_matching* m, size_t* out) {
  if (!m || !out) return bad_arg("matching: null argument");
  return guard([&] {
    *out = stm::find_unstable_pairs(m->m).size();
    return SM_OK;
  });
}

sm_status sm_matching_matched_samples(const sm_matching* m, sm_pointset** out) {
  if (!m || !out) return bad_arg("matched_samples: null argument");
  return guard([&] {
    *out = new sm_pointset{std::make_shared<stm::PointSet>(m->m.matched_psi_points())};
    return SM_OK;
  });
}

sm_status sm_matching_write_csv(const sm_matching* m, const char* path) {
  if (!m || !path) return bad_arg("matching: null argument");
  return guard([&] {
    m->m.write_csv(path);
    return SM_OK;
  });
}

sm_status sm_matching_read_csv(const char* path, const sm_pointset* lattice,
                               const sm_pointset* samples, sm_matching** out) {
  if (!path || !lattice || !samples || !out) return bad_arg("matching: null argument");
  return guard([&] {
    *out = new sm_matching{stm::Matching::read_csv(path, lattice->p, samples->p)};
    return SM_OK;
  });
}

/* ---- certification flowers ---- */

sm_status sm_flower_compute(const sm_matching* m, int anchor_on_lattice, size_t index,
                            uint64_t budget, sm_flower** out) {
  if (!m || !out) return bad_arg("flower: null argument");
  return guard([&] {
    const stm::Side side = anchor_on_lattice ? stm::Side::phi : stm::Side::psi;
    *out = new sm_flower{
        stm::matching_flower(m->m, side, static_cast<uint32_t>(index), budget),
        m->m.phi().box()};
    return SM_OK;
  });
}

void sm_flower_free(sm_flower* f) { delete f; }

size_t sm_flower_ball_count(const sm_flower* f) { return f ? f->f.balls.size() : 0; }

sm_status sm_flower_balls(const sm_flower* f, double* out) {
  if (!f || !out) return bad_arg("flower: null argument");
  size_t w = 0;
  for (const stm::Ball& b : f->f.balls) {
    for (int i = 0; i < f->box.dim; ++i) out[w++] = b.center[static_cast<size_t>(i)];
    out[w++] = b.radius;
  }
  g_error.clear();
  return SM_OK;
}

double sm_flower_bounding_radius(const sm_flower* f) {
  return f ? f->f.bounding_radius : 0.0;
}

int sm_flower_is_sentinel(const sm_flower* f) { return f && f->f.sentinel ? 1 : 0; }

sm_status sm_flower_intersects_ball(const sm_flower* f, const double* center,
                                    double radius, int* out) {
  if (!f || !center || !out) return bad_arg("flower: null argument");
  return guard([&] {
    *out = f->f.intersects_ball(center, radius, f->box) ? 1 : 0;
    return SM_OK;
  });
}

sm_status sm_flower_write_csv(const sm_flower* f, const char* path) {
  if (!f || !path) return bad_arg("flower: null argument");
  return guard([&] {
    f->f.write_csv(path, f->box);
    return SM_OK;
  });
}

/* ---- descending chains ---- */

sm_status sm_descending_chains(const sm_pointset* lattice, const sm_pointset* samples,
                               int start_on_lattice, size_t start, double bound, int n,
                               uint64_t budget, int exists_only, uint64_t* count) {
  if (!lattice || !samples || !count) return bad_arg("chains: null argument");
  return guard([&] {
    const stm::ChainSearch res = stm::descending_chains(
        *lattice->p, *samples->p, start_on_lattice ? stm::Side::phi : stm::Side::psi,
        static_cast<uint32_t>(start), bound, n, budget, false, exists_only != 0);
    *count = res.count;
    return SM_OK;
  });
}

/* ---- windows and recovery ---- */

sm_status sm_verify_stopping_set(const sm_pointset* lattice, const sm_pointset* samples,
                                 const double* z, const double* lo, const double* hi,
                                 uint64_t budget, int* ok) {
  if (!lattice || !samples || !z || !lo || !hi || !ok)
    return bad_arg("stopping set: null argument");
  return guard([&] {
    *ok = stm::verify_stopping_set(*lattice->p, *samples->p, z, lo, hi, budget) ? 1 : 0;
    return SM_OK;
  });
}

sm_status sm_is_decisive(const double* lo, const double* hi, int dim, const double* q,
                         const sm_pointset* samples, uint64_t budget, int* decisive) {
  if (!lo || !hi || !q || !samples || !decisive) return bad_arg("decisive: null argument");
  return guard([&] {
    *decisive = stm::is_decisive(lo, hi, dim, q, *samples->p, budget) ? 1 : 0;
    return SM_OK;
  });
}

sm_status sm_rigidity_recover(const sm_matching* m, const double* center, double radius,
                              uint64_t budget, int64_t* recovered, int64_t* truth) {
  if (!m || !center || !recovered || !truth) return bad_arg("rigidity: null argument");
  return guard([&] {
    const stm::RigidityRecord rec = stm::rigidity_recover(m->m, center, radius, budget);
    *truth = rec.truth;
    if (!rec.conclusive) {
      *recovered = -1;
      g_error = rec.reason;
      return SM_ERR_INCONCLUSIVE;
    }
    *recovered = rec.recovered;
    return SM_OK;
  });
}

/* ---- statistics ---- */

sm_status sm_matching_eccdf(const sm_matching* m, sm_table** out) {
  if (!m || !out) return bad_arg("eccdf: null argument");
  return guard([&] {
    *out = wrap(stm::matching_distance_eccdf(m->m).to_table());
    return SM_OK;
  });
}

sm_status sm_eccdf_from_values(const double* values, size_t n, sm_table** out) {
  if (!values || !out) return bad_arg("eccdf: null argument");
  return guard([&] {
    *out = wrap(stm::eccdf_from_values(std::vector<double>(values, values + n)).to_table());
    return SM_OK;
  });
}

sm_status sm_svg_plot(const char* path, const char* title, const char* xlabel,
                      const char* ylabel, int logx, int logy, size_t n_series,
                      const size_t* lens, const double* const* xs, const double* const* ys,
                      const char* const* colors) {
  if (!path || !lens || !xs || !ys) return bad_arg("svg_plot: null argument");
  return guard([&] {
    std::vector<stm::SvgSeries> series(n_series);
    for (size_t i = 0; i < n_series; ++i) {
      if (!xs[i] || !ys[i]) throw stm::InvalidArgument("svg_plot: null series");
      series[i].x.assign(xs[i], xs[i] + lens[i]);
      series[i].y.assign(ys[i], ys[i] + lens[i]);
      if (colors && colors[i]) series[i].color = colors[i];
    }
    stm::write_svg_plot(path, series, title ? title : "", xlabel ? xlabel : "",
                        ylabel ? ylabel : "", logx != 0, logy != 0);
    return SM_OK;
  });
}

sm_status sm_scattering(const sm_pointset* ps, int m_max, sm_table** out) {
  if (!ps || !out) return bad_arg("scattering: null argument");
  return guard([&] {
    *out = wrap(stm::scattering_intensity(*ps->p, m_max).to_table());
    return SM_OK;
  });
}

sm_status sm_log_bin(const double* x, const double* y, const uint8_t* skip, size_t n,
                     int bins_per_decade, sm_table** out) {
  if (!x || !y || !out) return bad_arg("log_bin: null argument");
  return guard([&] {
    std::vector<double> xv(x, x + n), yv(y, y + n);
    std::vector<uint8_t> sk;
    if (skip) sk.assign(skip, skip + n);
    *out = wrap(stm::log_bin(xv, yv, skip ? &sk : nullptr, bins_per_decade).to_table());
    return SM_OK;
  });
}

sm_status sm_number_variance(const sm_pointset* ps, const double* radii, size_t n_radii,
                             size_t centers, uint64_t seed, sm_table** out) {
  if (!ps || !radii || !out) return bad_arg("number_variance: null argument");
  return guard([&] {
    std::vector<double> rs(radii, radii + n_radii);
    *out = wrap(stm::number_variance(*ps->p, rs, centers, seed).to_table());
    return SM_OK;
  });
}

sm_status sm_pair_correlation(const sm_pointset* ps, double r_max, int n_bins,
                              sm_table** out) {
  if (!ps || !out) return bad_arg("pair_correlation: null argument");
  return guard([&] {
    *out = wrap(stm::pair_correlation(*ps->p, r_max, n_bins).to_table());
    return SM_OK;
  });
}

sm_status sm_fit_power_law(const double* x, const double* y, size_t n, double* slope,
                           double* intercept, double* r2) {
  if (!x || !y || !slope || !intercept || !r2) return bad_arg("fit: null argument");
  return guard([&] {
    const stm::Fit f =
        stm::fit_power_law(std::vector<double>(x, x + n), std::vector<double>(y, y + n));
    *slope = f.slope;
    *intercept = f.intercept;
    *r2 = f.r2;
    return SM_OK;
  });
}

sm_status sm_fit_semilog(const double* x, const double* y, size_t n, double* slope,
                         double* intercept, double* r2) {
  if (!x || !y || !slope || !intercept || !r2) return bad_arg("fit: null argument");
  return guard([&] {
    const stm::Fit f =
        stm::fit_semilog(std::vector<double>(x, x + n), std::vector<double>(y, y + n));
    *slope = f.slope;
    *intercept = f.intercept;
    *r2 = f.r2;
    return SM_OK;
  });
}

/* ---- tables ---- */

size_t sm_table_rows(const sm_table* t) { return t ? t->t.rows() : 0; }

size_t sm_table_cols(const sm_table* t) { return t ? t->t.cols() : 0; }

const char* sm_table_col_name(const sm_table* t, size_t col) {
  if (!t || col >= t->t.names.size()) return nullptr;
  return t->t.names[col].c_str();
}

sm_status sm_table_column(const sm_table* t, const char* name, double* out) {
  if (!t || !name || !out) return bad_arg("table: null argument");
  return guard([&] {
    const std::vector<double>& c = t->t.column(name);
    std::memcpy(out, c.data(), c.size() * sizeof(double));
    return SM_OK;
  });
}

sm_status sm_table_cell(const sm_table* t, size_t col, size_t row, double* out) {
  if (!t || !out) return bad_arg("table: null argument");
  if (col >= t->t.cols() || row >= t->t.rows()) return bad_arg("table: index out of range");
  *out = t->t.columns[col][row];
  g_error.clear();
  return SM_OK;
}

sm_status sm_table_meta(const sm_table* t, const char* key, char* buf, size_t len) {
  if (!t || !key || !buf || len == 0) return bad_arg("table: null argument");
  const auto it = t->t.meta.find(key);
  if (it == t->t.meta.end()) return bad_arg("table: missing metadata key");
  std::snprintf(buf, len, "%s", it->second.c_str());
  g_error.clear();
  return SM_OK;
}

sm_status sm_table_write_csv(const sm_table* t, const char* path) {
  if (!t || !path) return bad_arg("table: null argument");
  return guard([&] {
    t->t.write_csv(path);
    return SM_OK;
  });
}

sm_status sm_table_read_csv(const char* path, sm_table** out) {
  if (!path || !out) return bad_arg("table: null argument");
  return guard([&] {
    *out = wrap(stm::Table::read_csv(path));
    return SM_OK;
  });
}

void sm_table_free(sm_table* t) { delete t; }

}  // extern "C"
