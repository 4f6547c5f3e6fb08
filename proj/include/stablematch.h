/* C interface to the stable-matching toolkit: samplers for lattice, Poisson
 * and determinantal configurations on a torus, the mutual-nearest-pair
 * matching, certification flowers, descending-chain search, count recovery
 * from punctured data, and the summary statistics used to study them.
 *
 * Every function that can fail returns sm_status; sm_last_error() describes
 * the most recent failure on the calling thread. Objects returned through
 * out-parameters are owned by the caller and released with the matching
 * *_free function. All handles are opaque.
 */
#ifndef STABLEMATCH_H
#define STABLEMATCH_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sm_status {
  SM_OK = 0,
  SM_ERR_INVALID_ARGUMENT = 1,
  SM_ERR_BUDGET_EXHAUSTED = 2,
  SM_ERR_INCONCLUSIVE = 3,
  SM_ERR_IO = 4,
  SM_ERR_INTERNAL = 5
} sm_status;

const char* sm_version(void);
/* message for the last failing call on this thread ("" if none) */
const char* sm_last_error(void);

typedef struct sm_pointset sm_pointset;
typedef struct sm_matching sm_matching;
typedef struct sm_flower sm_flower;
typedef struct sm_table sm_table;

/* ---- point configurations ---- */

/* Integer lattice on the torus [0, side)^dim, optionally shifted.
 * shift_mode: "deterministic" (no shift), "fixed" (use offset[dim], each in
 * [0,1)), "stationary" (offset drawn uniformly from seed). offset may be NULL
 * unless mode is "fixed". */
sm_status sm_lattice_create(int dim, int64_t side, const char* shift_mode,
                            const double* offset, uint64_t seed, sm_pointset** out);

/* Homogeneous Poisson sample of intensity alpha on the torus. */
sm_status sm_poisson_create(int dim, double side, double alpha, uint64_t seed,
                            sm_pointset** out);

/* Determinantal sample with spectral density amplitude*exp(-|scale*k|^shape)
 * on the torus modes; intensity alpha. scale_fraction in (0,1] sets the scale
 * relative to the largest admissible one and pins amplitude =
 * scale_fraction^dim. trunc = 0 picks the mode truncation automatically. */
sm_status sm_dpp_create(int dim, double side, double alpha, double shape,
                        double scale_fraction, int trunc, uint64_t seed,
                        sm_pointset** out);

/* expected point count of the determinantal model (sum of eigenvalues) */
sm_status sm_dpp_expected_count(int dim, double side, double alpha, double shape,
                                double scale_fraction, int trunc, double* out);

/* Wrap explicit coordinates (n points, point-major, stride dim).
 * periodic != 0 means torus coordinates in [0, side); label is "lattice" or
 * "sample". */
sm_status sm_pointset_from_coords(int dim, double side, int periodic, const char* label,
                                  const double* coords, size_t n, uint64_t seed,
                                  sm_pointset** out);

void sm_pointset_free(sm_pointset* ps);
size_t sm_pointset_size(const sm_pointset* ps);
int sm_pointset_dim(const sm_pointset* ps);
double sm_pointset_side(const sm_pointset* ps);
/* copies size*dim doubles into out */
sm_status sm_pointset_coords(const sm_pointset* ps, double* out);
sm_status sm_pointset_write_csv(const sm_pointset* ps, const char* path);
sm_status sm_pointset_read_csv(const char* path, sm_pointset** out);

/* ---- matching ---- */

/* Mutual-nearest-pair matching of lattice against samples (both on the same
 * box). Ties are broken by the displacement order, so the result is unique
 * and deterministic. */
sm_status sm_match(const sm_pointset* lattice, const sm_pointset* samples,
                   sm_matching** out);

/* Reference quadratic matcher (global sorted pair sweep); same result. */
sm_status sm_match_brute_force(const sm_pointset* lattice, const sm_pointset* samples,
                               sm_matching** out);

/* One-sided last-in-first-out sweep on the line (dim 1 only). Either out
 * pointer may be NULL. The trace table has columns t, queue_len. */
sm_status sm_one_sided_match(const sm_pointset* lattice, const sm_pointset* samples,
                             sm_matching** out_match, sm_table** out_trace);

void sm_matching_free(sm_matching* m);
size_t sm_matching_matched_count(const sm_matching* m);
int32_t sm_matching_round_count(const sm_matching* m);
/* -1 when unmatched or out of range */
int64_t sm_matching_partner_of_lattice(const sm_matching* m, size_t i);
int64_t sm_matching_partner_of_sample(const sm_matching* m, size_t i);
int32_t sm_matching_round_of_lattice(const sm_matching* m, size_t i);
/* matched-pair distances in lattice order; out must hold matched_count */
sm_status sm_matching_distances(const sm_matching* m, double* out);
/* number of pairs in which both endpoints prefer each other over their
 * current state (0 certifies stability) */
sm_status sm_matching_count_unstable(const sm_matching* m, size_t* out);
/* samples that found a partner, as a point set on the same box */
sm_status sm_matching_matched_samples(const sm_matching* m, sm_pointset** out);
sm_status sm_matching_write_csv(const sm_matching* m, const char* path);
sm_status sm_matching_read_csv(const char* path, const sm_pointset* lattice,
                               const sm_pointset* samples, sm_matching** out);

/* ---- certification flowers ---- */

/* anchor_on_lattice selects the side of the anchor index. */
sm_status sm_flower_compute(const sm_matching* m, int anchor_on_lattice, size_t index,
                            uint64_t budget, sm_flower** out);
void sm_flower_free(sm_flower* f);
size_t sm_flower_ball_count(const sm_flower* f);
/* rows of dim+1 doubles: center then radius */
sm_status sm_flower_balls(const sm_flower* f, double* out);
double sm_flower_bounding_radius(const sm_flower* f);
int sm_flower_is_sentinel(const sm_flower* f);
/* 1 when the flower meets the closed ball B(center, radius) */
sm_status sm_flower_intersects_ball(const sm_flower* f, const double* center,
                                    double radius, int* out);
sm_status sm_flower_write_csv(const sm_flower* f, const char* path);

/* ---- descending chains ---- */

/* Count (or just detect, when exists_only != 0) alternating chains of exactly
 * 2n+1 points starting at `start` on the given side whose steps never
 * lengthen, with first step at most bound. */
sm_status sm_descending_chains(const sm_pointset* lattice, const sm_pointset* samples,
                               int start_on_lattice, size_t start, double bound, int n,
                               uint64_t budget, int exists_only, uint64_t* count);

/* ---- windows and recovery ---- */

/* Tests whether the window [lo,hi]^dim screens the anchor z from everything
 * outside: clipping may not change whether the flower fits in the window nor
 * the anchor's partner. Free-space instances only. */
sm_status sm_verify_stopping_set(const sm_pointset* lattice, const sm_pointset* samples,
                                 const double* z, const double* lo, const double* hi,
                                 uint64_t budget, int* ok);

/* Whether the cube [lo,hi] decides the match of integer point q given only
 * the samples inside the cube. Free-space instances only. */
sm_status sm_is_decisive(const double* lo, const double* hi, int dim, const double* q,
                         const sm_pointset* samples, uint64_t budget, int* decisive);

/* Deletes the matched samples in the closed ball B(center, radius), re-matches
 * the survivors, and reconstructs how many were deleted from the outside
 * configuration alone. Returns SM_ERR_INCONCLUSIVE (with recovered/truth still
 * filled as far as known and reason in sm_last_error) when a certificate
 * cannot be established within budget. */
sm_status sm_rigidity_recover(const sm_matching* m, const double* center, double radius,
                              uint64_t budget, int64_t* recovered, int64_t* truth);

/* ---- statistics ---- */

/* empirical tail of the matched-pair distance distribution;
 * columns value, tail */
sm_status sm_matching_eccdf(const sm_matching* m, sm_table** out);

/* empirical tail of an arbitrary sample (e.g. distances pooled across runs);
 * columns value, tail */
sm_status sm_eccdf_from_values(const double* values, size_t n, sm_table** out);

/* structure factor at torus modes k = 2*pi*m/side, 0 <= m_i <= m_max, m != 0;
 * columns m1..md, k, s, bragg */
sm_status sm_scattering(const sm_pointset* ps, int m_max, sm_table** out);

/* geometric binning (bins_per_decade log-spaced), skipping rows with
 * skip[i] != 0 when skip is non-NULL; columns x, y, n */
sm_status sm_log_bin(const double* x, const double* y, const uint8_t* skip, size_t n,
                     int bins_per_decade, sm_table** out);

/* variance of the point count in balls around uniform random centers;
 * columns radius, mean, variance, se */
sm_status sm_number_variance(const sm_pointset* ps, const double* radii, size_t n_radii,
                             size_t centers, uint64_t seed, sm_table** out);

/* pair correlation estimate on the torus; columns r, g */
sm_status sm_pair_correlation(const sm_pointset* ps, double r_max, int n_bins,
                              sm_table** out);

/* least-squares fit of log y against log x (power law) */
sm_status sm_fit_power_law(const double* x, const double* y, size_t n, double* slope,
                           double* intercept, double* r2);
/* least-squares fit of log y against x (exponential tail) */
sm_status sm_fit_semilog(const double* x, const double* y, size_t n, double* slope,
                         double* intercept, double* r2);

/* self-contained SVG line plot; one polyline per series, series i has lens[i]
 * points; colors may be NULL (or hold NULL entries) for defaults; log axes
 * drop non-positive values */
sm_status sm_svg_plot(const char* path, const char* title, const char* xlabel,
                      const char* ylabel, int logx, int logy, size_t n_series,
                      const size_t* lens, const double* const* xs, const double* const* ys,
                      const char* const* colors);

/* ---- tables ---- */

size_t sm_table_rows(const sm_table* t);
size_t sm_table_cols(const sm_table* t);
/* NULL when col is out of range */
const char* sm_table_col_name(const sm_table* t, size_t col);
/* copies the named column (rows doubles) into out */
sm_status sm_table_column(const sm_table* t, const char* name, double* out);
sm_status sm_table_cell(const sm_table* t, size_t col, size_t row, double* out);
/* copies the metadata value for key into buf (truncating); missing key fails */
sm_status sm_table_meta(const sm_table* t, const char* key, char* buf, size_t len);
sm_status sm_table_write_csv(const sm_table* t, const char* path);
sm_status sm_table_read_csv(const char* path, sm_table** out);
void sm_table_free(sm_table* t);

#ifdef __cplusplus
}
#endif

#endif /* STABLEMATCH_H */
