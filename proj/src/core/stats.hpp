#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/matching.hpp"
#include "core/pointset.hpp"

namespace stm {

// Named-column numeric table with a key=value metadata header. All stats
// results can be flattened into one of these for CSV round trips.
struct Table {
  std::map<std::string, std::string> meta;
  std::vector<std::string> names;            // one per column
  std::vector<std::vector<double>> columns;  // equal lengths

  size_t rows() const { return columns.empty() ? 0 : columns[0].size(); }
  size_t cols() const { return columns.size(); }
  const std::vector<double>& column(const std::string& name) const;

  void write_csv(const std::string& path) const;
  static Table read_csv(const std::string& path);
};

// Empirical tail P(V > r) evaluated at each distinct sample value.
struct Eccdf {
  std::vector<double> value;  // ascending distinct sample values
  std::vector<double> tail;   // fraction of samples strictly above value[i]
  size_t n = 0;               // sample count
  Table to_table() const;
};

Eccdf eccdf_from_values(std::vector<double> values);

// Tail of the matched-pair distance distribution of a matching. Only matched
// lattice points contribute; throws if nothing is matched.
Eccdf matching_distance_eccdf(const Matching& m);

// Structure factor S(k) = |sum_j exp(-i<k,x_j>)|^2 / N at the discrete modes
// k = 2*pi*m/L for integer multi-indices m with 0 <= m_i <= m_max, m != 0.
// Modes that coincide with reciprocal lattice vectors of Z^d (integer L and
// every m_i divisible by L) carry Bragg weight and are flagged.
struct Scattering {
  int dim = 0;
  double side = 0.0;
  std::vector<int32_t> modes;  // dim entries per row
  std::vector<double> k;       // |k| per row
  std::vector<double> s;       // S(k) per row
  std::vector<uint8_t> bragg;  // 1 when the mode sits on the dual lattice
  size_t size() const { return s.size(); }
  Table to_table() const;
};

Scattering scattering_intensity(const PointSet& ps, int m_max);

// Geometric binning of scattering values: bins_per_decade log-spaced bins,
// values averaged within each bin, Bragg rows skipped.
struct BinnedCurve {
  std::vector<double> x;      // geometric bin centers
  std::vector<double> y;      // mean value in bin
  std::vector<int64_t> n;     // rows pooled into bin
  Table to_table() const;
};

BinnedCurve log_bin(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<uint8_t>* skip, int bins_per_decade);

// Variance of the number of points in a ball of radius r around uniform
// random centers, one row per requested radius.
struct NumberVariance {
  std::vector<double> radius;
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> se;  // standard error of the variance estimate
  size_t centers = 0;
  Table to_table() const;
};

NumberVariance number_variance(const PointSet& ps, const std::vector<double>& radii,
                               size_t n_centers, uint64_t seed);

// Pair correlation estimate on a torus: ordered pair distances histogrammed
// into n_bins equal-width shells on (0, r_max], normalised by density and
// shell volume so an ideal gas gives g = 1.
struct PairCorrelation {
  std::vector<double> r;  // shell midpoints
  std::vector<double> g;
  Table to_table() const;
};

PairCorrelation pair_correlation(const PointSet& ps, double r_max, int n_bins);

// Least-squares fits used for slope read-offs. Rows with nonpositive inputs
// to a log transform are dropped; fewer than two surviving rows throws.
struct Fit {
  double slope = 0.0;      // exponent for the power law, rate for semilog
  double intercept = 0.0;  // log-amplitude
  double r2 = 0.0;
  size_t n = 0;
};

Fit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);
Fit fit_semilog(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace stm
