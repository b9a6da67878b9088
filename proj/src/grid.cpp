#include "iit/grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace iit {

namespace {

constexpr double kLatticeTol = 1e-12;
constexpr double kZeroNormTol = 1e-12;
// Gaussian tails beyond this many density standard deviations may be truncated.
constexpr double kGaussianSpanSigmas = 6.0;

void require_finite(std::span<const cplx> amps) {
  for (const auto& a : amps) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      throw Error(Errc::NonFinite, "wavefunction amplitude is not finite");
    }
  }
}

}  // namespace

Grid Grid::from_lattice(std::int64_t origin, std::size_t n, double spacing) {
  if (n < 2 || !(spacing > 0.0) || !std::isfinite(spacing)) {
    throw Error(Errc::InvalidBounds, "grid needs n >= 2 and a positive finite spacing");
  }
  return Grid(origin, n, spacing);
}

Grid make_grid(double min, double max, std::size_t n) {
  if (!(min < max) || n < 2) {
    std::ostringstream os;
    os << "make_grid(" << min << ", " << max << ", " << n << ")";
    throw Error(Errc::InvalidBounds, os.str());
  }
  const double spacing = (max - min) / static_cast<double>(n - 1);
  const double ratio = min / spacing;
  const double origin = std::round(ratio);
  if (std::abs(ratio - origin) > kLatticeTol * std::max(1.0, std::abs(ratio))) {
    std::ostringstream os;
    os << "min " << min << " is not a multiple of spacing " << spacing;
    throw Error(Errc::LatticeMisaligned, os.str());
  }
  return Grid::from_lattice(static_cast<std::int64_t>(origin), n, spacing);
}

double density_variance(double variance, VarianceConvention conv) {
  return conv == VarianceConvention::Density ? variance : 0.5 * variance;
}

double support_gap(const SupportSpec& a, const SupportSpec& b) {
  return std::max(a.lo, b.lo) - std::min(a.hi, b.hi);
}

Wavefunction::Wavefunction(Grid grid, std::vector<cplx> amplitudes)
    : grid_(grid), amps_(std::move(amplitudes)) {
  if (amps_.size() != grid_.size()) {
    throw Error(Errc::GridMismatch, "amplitude count does not match grid size");
  }
  require_finite(amps_);
}

Wavefunction Wavefunction::zero(const Grid& grid) {
  return Wavefunction(grid, std::vector<cplx>(grid.size()));
}

Wavefunction Wavefunction::scaled(cplx factor) const {
  std::vector<cplx> out(amps_);
  for (auto& a : out) a *= factor;
  return Wavefunction(grid_, std::move(out));
}

std::vector<double> Wavefunction::density() const {
  std::vector<double> out(amps_.size());
  for (std::size_t i = 0; i < amps_.size(); ++i) out[i] = std::norm(amps_[i]);
  return out;
}

double Density::total() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * grid.spacing();
}

void require_same_grid(const Grid& a, const Grid& b, const char* context) {
  if (!(a == b)) throw Error(Errc::GridMismatch, context);
}

Wavefunction gaussian_wf(const Grid& grid, double mean, double variance,
                         VarianceConvention conv) {
  if (!(variance > 0.0)) {
    throw Error(Errc::NonPositiveVariance, "gaussian_wf variance must be positive");
  }
  const double sd = std::sqrt(density_variance(variance, conv));
  const double reach = kGaussianSpanSigmas * sd * (1.0 - 1e-12);
  if (grid.min() > mean - reach || grid.max() < mean + reach) {
    std::ostringstream os;
    os << "grid [" << grid.min() << ", " << grid.max() << "] does not cover mean " << mean
       << " +/- " << kGaussianSpanSigmas << " sd (sd = " << sd << ")";
    throw Error(Errc::GridTooNarrow, os.str());
  }
  const double denom = conv == VarianceConvention::Density ? 4.0 * variance : 2.0 * variance;
  const double prefactor = conv == VarianceConvention::Density
                               ? std::pow(2.0 * std::numbers::pi * variance, -0.25)
                               : std::pow(std::numbers::pi * variance, -0.25);
  std::vector<cplx> amps(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.point(i) - mean;
    amps[i] = prefactor * std::exp(-x * x / denom);
  }
  return normalize(Wavefunction(grid, std::move(amps)));
}

Wavefunction bump_wf(const Grid& grid, const SupportSpec& support) {
  if (!(support.lo < support.hi)) {
    throw Error(Errc::InvalidBounds, "support interval needs lo < hi");
  }
  if (!(grid.min() < support.lo && support.hi < grid.max())) {
    std::ostringstream os;
    os << "support (" << support.lo << ", " << support.hi << ") not strictly inside grid ["
       << grid.min() << ", " << grid.max() << "]";
    throw Error(Errc::SupportOutsideGrid, os.str());
  }
  std::vector<cplx> amps(grid.size());
  const double half = 0.5 * support.width();
  const double mid = support.center();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = (grid.point(i) - mid) / half;
    if (std::abs(t) < 1.0) amps[i] = std::exp(-1.0 / (1.0 - t * t));
  }
  return normalize(Wavefunction(grid, std::move(amps)));
}

Wavefunction superpose(cplx a, const Wavefunction& f, cplx b, const Wavefunction& g) {
  require_same_grid(f.grid(), g.grid(), "superpose: operands live on different grids");
  std::vector<cplx> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * f[i] + b * g[i];
  return Wavefunction(f.grid(), std::move(out));
}

cplx inner(const Wavefunction& f, const Wavefunction& g) {
  require_same_grid(f.grid(), g.grid(), "inner: operands live on different grids");
  cplx s{};
  for (std::size_t i = 0; i < f.size(); ++i) s += std::conj(f[i]) * g[i];
  return s * f.grid().spacing();
}

double norm(const Wavefunction& f) {
  double s = 0.0;
  for (const auto& a : f.amplitudes()) s += std::norm(a);
  return std::sqrt(s * f.grid().spacing());
}

Wavefunction normalize(const Wavefunction& f) {
  const double n = norm(f);
  if (!(n > kZeroNormTol)) throw Error(Errc::ZeroNorm, "cannot normalize a zero wavefunction");
  return f.scaled(1.0 / n);
}

Moments density_moments(const Wavefunction& f) {
  double mass = 0.0;
  double first = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double p = std::norm(f[i]);
    mass += p;
    first += p * f.grid().point(i);
  }
  if (!(mass > 0.0)) throw Error(Errc::ZeroNorm, "moments of a zero wavefunction");
  const double mean = first / mass;
  double second = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double x = f.grid().point(i) - mean;
    second += std::norm(f[i]) * x * x;
  }
  return {mean, second / mass};
}

}  // namespace iit
