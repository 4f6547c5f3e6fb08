#include "core/samplers.hpp"

#include <cmath>
#include <complex>

#include "core/errors.hpp"

namespace stm {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

inline double clamp_into(double c, double side) {
  return c >= side ? std::nextafter(side, 0.0) : c;
}

}  // namespace

PointSet make_lattice(const LatticeSpec& spec) {
  if (spec.dim < 1 || spec.dim > kMaxDim) throw InvalidArgument("lattice: dim must be 1..3");
  if (spec.side < 1) throw InvalidArgument("lattice: side must be a positive integer");
  std::array<double, kMaxDim> u{0.0, 0.0, 0.0};
  if (spec.mode == ShiftMode::fixed) {
    u = spec.offset;
    for (int i = 0; i < spec.dim; ++i)
      if (!(u[i] >= 0.0 && u[i] < 1.0)) throw InvalidArgument("lattice: offset must be in [0,1)");
  } else if (spec.mode == ShiftMode::stationary) {
    Rng rng(spec.seed);
    for (int i = 0; i < spec.dim; ++i) u[i] = rng.uniform01();
  }

  const int64_t L = spec.side;
  size_t n = 1;
  for (int i = 0; i < spec.dim; ++i) n *= static_cast<size_t>(L);
  std::vector<double> coords;
  coords.reserve(n * static_cast<size_t>(spec.dim));
  int64_t q[kMaxDim] = {0, 0, 0};
  const double side = static_cast<double>(L);
  for (size_t flat = 0; flat < n; ++flat) {
    size_t rem = flat;
    for (int i = spec.dim - 1; i >= 0; --i) {
      q[i] = static_cast<int64_t>(rem % static_cast<size_t>(L));
      rem /= static_cast<size_t>(L);
    }
    for (int i = 0; i < spec.dim; ++i)
      coords.push_back(clamp_into(static_cast<double>(q[i]) + u[i], side));
  }
  Box box{spec.dim, side, true};
  return PointSet(box, std::move(coords), PointLabel::lattice, spec.seed);
}

PointSet sample_poisson(int dim, double side, double alpha, uint64_t seed) {
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("poisson: dim must be 1..3");
  if (!(side > 0.0)) throw InvalidArgument("poisson: side must be positive");
  if (!(alpha >= 0.0)) throw InvalidArgument("poisson: intensity must be >= 0");
  Rng rng(seed);
  double volume = 1.0;
  for (int i = 0; i < dim; ++i) volume *= side;
  const int64_t n = rng.poisson(alpha * volume);
  std::vector<double> coords(static_cast<size_t>(n) * static_cast<size_t>(dim));
  for (double& c : coords) c = clamp_into(rng.uniform01() * side, side);
  Box box{dim, side, true};
  return PointSet(box, std::move(coords), PointLabel::sample, seed);
}

SpectralModel make_spectral_model(int dim, double side, double alpha, double shape,
                                  double scale_fraction, int trunc) {
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("spectral model: dim must be 1..3");
  if (!(side > 0.0)) throw InvalidArgument("spectral model: side must be positive");
  if (!(alpha > 0.0)) throw InvalidArgument("spectral model: intensity must be positive");
  if (!(shape > 0.0)) throw InvalidArgument("spectral model: shape must be positive");
  if (!(scale_fraction > 0.0)) throw InvalidArgument("spectral model: scale fraction must be positive");

  SpectralModel m;
  m.dim = dim;
  m.side = side;
  m.alpha = alpha;
  m.shape = shape;
  m.scale_fraction = scale_fraction;

  // Normalisation: integral of exp(-|u|^shape) over R^d is kappa_d*Gamma(d/shape+1),
  // so amplitude(scale) = alpha*(2pi)^d*scale^d / (kappa_d*Gamma(d/shape+1)).
  // The largest admissible scale has amplitude 1; taking scale_fraction of it
  // leaves amplitude = scale_fraction^d exactly.
  const double gamma_term = std::tgamma(static_cast<double>(dim) / shape + 1.0);
  const double scale_max =
      std::pow(unit_ball_volume(dim) * gamma_term / (alpha * std::pow(kTwoPi, dim)),
               1.0 / dim);
  m.scale = scale_fraction * scale_max;
  m.amplitude = std::pow(scale_fraction, dim);
  if (m.amplitude > 1.0)
    throw InvalidArgument(
        "spectral model: scale too large for requested intensity (max eigenvalue " +
        std::to_string(m.amplitude) + " > 1)");

  if (trunc <= 0) {
    // keep modes until the density has dropped by 1e9; the discarded mass is
    // then far below the 1e-3 target for any shape >= 1
    const double reach = (side / (kTwoPi * m.scale)) * std::pow(std::log(1e9), 1.0 / shape);
    trunc = static_cast<int>(std::ceil(reach));
  }
  if (trunc < 1) trunc = 1;
  m.trunc = trunc;
  const double modes_per_axis = 2.0 * trunc + 1.0;
  if (std::pow(modes_per_axis, dim) > 8e6)
    throw InvalidArgument("spectral model: truncation would enumerate too many modes");

  const int M = trunc;
  int32_t q[kMaxDim] = {0, 0, 0};
  const int64_t span = 2 * M + 1;
  int64_t total = 1;
  for (int i = 0; i < dim; ++i) total *= span;
  m.modes.reserve(static_cast<size_t>(total) * dim);
  m.eigen.reserve(static_cast<size_t>(total));
  double sum = 0.0, comp = 0.0;
  for (int64_t flat = 0; flat < total; ++flat) {
    int64_t rem = flat;
    for (int i = dim - 1; i >= 0; --i) {
      q[i] = static_cast<int32_t>(rem % span) - M;
      rem /= span;
    }
    double k2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double k = kTwoPi * q[i] / side;
      k2 += k * k;
    }
    const double lam = m.amplitude * std::exp(-std::pow(m.scale * std::sqrt(k2), shape));
    for (int i = 0; i < dim; ++i) m.modes.push_back(q[i]);
    m.eigen.push_back(lam);
    const double y = lam - comp;  // Kahan: the sum feeds a 1% validation
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  m.eigen_sum = sum;

  double volume = 1.0;
  for (int i = 0; i < dim; ++i) volume *= side;
  const double target = alpha * volume;
  if (std::fabs(m.eigen_sum - target) > 0.01 * target)
    throw InvalidArgument("spectral model: mode sum " + std::to_string(m.eigen_sum) +
                          " deviates more than 1% from requested mean count " +
                          std::to_string(target) + "; box too small for this spectral density");
  return m;
}

PointSet sample_dpp(const SpectralModel& model, uint64_t seed) {
  using cd = std::complex<double>;
  Rng rng(seed);

  // Bernoulli thinning of modes by eigenvalue
  std::vector<uint32_t> sel;
  for (size_t i = 0; i < model.mode_count(); ++i) {
    if (rng.uniform01() < model.eigen[i]) sel.push_back(static_cast<uint32_t>(i));
  }
  const size_t n = sel.size();
  Box box{model.dim, model.side, true};
  if (n == 0) return PointSet(box, {}, PointLabel::sample, seed);
  if (n > 4096) throw InvalidArgument("spectral sample too large; reduce intensity or box");

  const int d = model.dim;
  const double L = model.side;
  double volume = 1.0;
  for (int i = 0; i < d; ++i) volume *= L;
  const double norm2_v = static_cast<double>(n) / volume;  // |v(x)|^2, constant on the torus
  const double inv_sqrt_vol = 1.0 / std::sqrt(volume);

  std::vector<cd> basis;  // orthonormal rows, n entries each
  basis.reserve(n * n);
  std::vector<cd> v(n), w(n);
  std::vector<double> x(static_cast<size_t>(d));
  std::vector<double> coords;
  coords.reserve(n * static_cast<size_t>(d));

  auto eval_v = [&](const std::vector<double>& pt) {
    for (size_t j = 0; j < n; ++j) {
      const int32_t* mv = model.modes.data() + static_cast<size_t>(sel[j]) * d;
      double angle = 0.0;
      for (int i = 0; i < d; ++i) angle += mv[i] * pt[static_cast<size_t>(i)];
      angle *= kTwoPi / L;
      v[j] = std::polar(inv_sqrt_vol, angle);
    }
  };

  for (size_t step = 0; step < n; ++step) {
    const size_t rank = step;  // vectors already in the basis
    bool accepted = false;
    for (uint64_t attempt = 0; attempt < 2000000; ++attempt) {
      for (int i = 0; i < d; ++i) x[static_cast<size_t>(i)] = rng.uniform01() * L;
      eval_v(x);
      // modified Gram-Schmidt against the accepted directions
      w = v;
      for (size_t b = 0; b < rank; ++b) {
        const cd* e = basis.data() + b * n;
        cd c(0.0, 0.0);
        for (size_t j = 0; j < n; ++j) c += std::conj(e[j]) * w[j];
        for (size_t j = 0; j < n; ++j) w[j] -= c * e[j];
      }
      double res = 0.0;
      for (size_t j = 0; j < n; ++j) res += std::norm(w[j]);
      if (rng.uniform01() * norm2_v < res) {
        const double inv = 1.0 / std::sqrt(res);
        for (size_t j = 0; j < n; ++j) basis.push_back(w[j] * inv);
        for (int i = 0; i < d; ++i)
          coords.push_back(clamp_into(x[static_cast<size_t>(i)], L));
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw BudgetExhausted("spectral sampler: proposal budget exhausted (degenerate projection)");
  }
  return PointSet(box, std::move(coords), PointLabel::sample, seed);
}

}  // namespace stm
