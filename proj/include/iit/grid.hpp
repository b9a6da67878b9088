#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "iit/error.hpp"

namespace iit {

using cplx = std::complex<double>;

/// Uniform 1D position grid whose points sit on the integer lattice k * spacing.
///
/// Storing the lattice offset of the first point (rather than a floating
/// minimum) keeps shear shifts exact integer index moves.
class Grid {
 public:
  static Grid from_lattice(std::int64_t origin, std::size_t n, double spacing);

  std::size_t size() const noexcept { return n_; }
  double spacing() const noexcept { return spacing_; }
  std::int64_t origin() const noexcept { return origin_; }
  std::int64_t lattice_index(std::size_t i) const noexcept {
    return origin_ + static_cast<std::int64_t>(i);
  }
  double point(std::size_t i) const noexcept {
    return static_cast<double>(lattice_index(i)) * spacing_;
  }
  double min() const noexcept { return point(0); }
  double max() const noexcept { return point(n_ - 1); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Grid(std::int64_t origin, std::size_t n, double spacing)
      : origin_(origin), n_(n), spacing_(spacing) {}

  std::int64_t origin_;
  std::size_t n_;
  double spacing_;
};

/// Grid spanning [min, max] with n points; min must lie on the spacing lattice.
Grid make_grid(double min, double max, std::size_t n);

/// Which variance a Gaussian's "variance" parameter refers to.
enum class VarianceConvention {
  Density,    // variance of |psi|^2; amplitude ~ exp(-(q-m)^2 / (4 v))
  Amplitude,  // amplitude ~ exp(-(q-m)^2 / (2 v)); density variance is v / 2
};

/// Variance of |psi|^2 for a Gaussian specified under `conv`.
double density_variance(double variance, VarianceConvention conv);

/// Open interval (lo, hi) on the position axis.
struct SupportSpec {
  double lo = 0.0;
  double hi = 0.0;

  double width() const noexcept { return hi - lo; }
  double center() const noexcept { return 0.5 * (lo + hi); }
};

/// Separation between two open intervals; zero or negative means they touch or overlap.
double support_gap(const SupportSpec& a, const SupportSpec& b);

class Wavefunction {
 public:
  Wavefunction(Grid grid, std::vector<cplx> amplitudes);

  static Wavefunction zero(const Grid& grid);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const cplx> amplitudes() const noexcept { return amps_; }
  std::size_t size() const noexcept { return amps_.size(); }
  cplx operator[](std::size_t i) const noexcept { return amps_[i]; }

  Wavefunction scaled(cplx factor) const;

  /// Probability density |psi|^2 sampled on the grid.
  std::vector<double> density() const;

 private:
  Grid grid_;
  std::vector<cplx> amps_;
};

/// Real density sampled on a grid (marginals, shift weights).
struct Density {
  Grid grid;
  std::vector<double> values;

  double total() const;  // sum(values) * spacing
};

Wavefunction gaussian_wf(const Grid& grid, double mean, double variance,
                         VarianceConvention conv = VarianceConvention::Density);

/// Smooth bump exp(-1/(1-t^2)) on the rescaled interval; exactly zero outside it.
Wavefunction bump_wf(const Grid& grid, const SupportSpec& support);

Wavefunction superpose(cplx a, const Wavefunction& f, cplx b, const Wavefunction& g);

/// <f|g> with the left argument conjugated, Riemann weight spacing.
cplx inner(const Wavefunction& f, const Wavefunction& g);
double norm(const Wavefunction& f);
Wavefunction normalize(const Wavefunction& f);

/// Density mean and variance of |f|^2 (f need not be normalized).
struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};
Moments density_moments(const Wavefunction& f);

void require_same_grid(const Grid& a, const Grid& b, const char* context);

}  // namespace iit
