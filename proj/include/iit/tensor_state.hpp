#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "iit/grid.hpp"
#include "iit/kernels.hpp"

namespace iit {

/// Modulus below which an amplitude is treated as outside a state's support.
inline constexpr double kSupportThreshold = 1e-14;

/// Complex amplitudes over a tuple of 2 or 3 grids.
///
/// Axes are 0-based: axis 0 is particle 1, axis 1 particle 2, axis 2 particle 3.
/// Amplitudes are stored row-major with axis 0 slowest.
class TensorState {
 public:
  TensorState(std::vector<Grid> grids, std::vector<cplx> amplitudes);

  static TensorState zeros(std::vector<Grid> grids);

  std::size_t rank() const noexcept { return grids_.size(); }
  const std::vector<Grid>& grids() const noexcept { return grids_; }
  const Grid& grid(std::size_t axis) const;
  std::span<const cplx> amplitudes() const noexcept { return amps_; }
  std::span<cplx> mutable_amplitudes() noexcept { return amps_; }
  kernels::Shape3 shape() const noexcept;
  /// Product of the grid spacings.
  double cell_volume() const noexcept;

  cplx at(std::size_t i0, std::size_t i1, std::size_t i2 = 0) const;

  double norm_squared() const;

 private:
  std::vector<Grid> grids_;
  std::vector<cplx> amps_;
};

/// Outer product of 2 or 3 single-particle factors.
TensorState product(std::span<const Wavefunction> factors);

/// a psi+ (x) phi+ + b psi- (x) phi-.
TensorState entangled_pair(cplx a, const Wavefunction& psi_plus, const Wavefunction& phi_plus,
                           cplx b, const Wavefunction& psi_minus,
                           const Wavefunction& phi_minus);

/// Appends a factor as a new last axis: state (x) f.
TensorState append_factor(const TensorState& state, const Wavefunction& f);

/// Exact transport solution Psi'(.., q_tgt, ..) = Psi(.., q_tgt - strength * q_src, ..).
///
/// strength * spacing_src / spacing_tgt must be an integer; the result is a
/// permutation of amplitude samples and therefore conserves the norm exactly.
TensorState shear(const TensorState& state, std::size_t src_axis, std::size_t tgt_axis,
                  double strength);

/// Integer index shift per unit source lattice index; throws `failure` if not integral.
std::int64_t commensurate_ratio(double strength, double src_spacing, double tgt_spacing,
                                Errc failure);

Density marginal_density(const TensorState& state, std::size_t axis);

cplx overlap_states(const TensorState& s1, const TensorState& s2);

using Matrix2 = std::array<std::array<cplx, 2>, 2>;

/// Finite-rank Hermitian observable sum_{s,s'} M_{ss'} |psi_s><psi_s'| on span{psi+, psi-}.
class Operator1 {
 public:
  const Wavefunction& plus() const noexcept { return plus_; }
  const Wavefunction& minus() const noexcept { return minus_; }
  const Matrix2& matrix() const noexcept { return m_; }
  cplx alpha() const noexcept { return m_[0][1]; }
  double a_pp() const noexcept { return m_[0][0].real(); }
  double a_mm() const noexcept { return m_[1][1].real(); }

 private:
  friend Operator1 dyad_operator(const Wavefunction&, const Wavefunction&, const Matrix2&);
  Operator1(Wavefunction plus, Wavefunction minus, const Matrix2& m)
      : plus_(std::move(plus)), minus_(std::move(minus)), m_(m) {}

  Wavefunction plus_;
  Wavefunction minus_;
  Matrix2 m_;
};

Operator1 dyad_operator(const Wavefunction& psi_plus, const Wavefunction& psi_minus,
                        const Matrix2& matrix);

/// <Psi| A on `axis` (x) identity elsewhere |Psi>; imaginary part is rounding noise.
cplx expect_local_complex(const TensorState& state, std::size_t axis, const Operator1& op);
double expect_local(const TensorState& state, std::size_t axis, const Operator1& op);

}  // namespace iit
