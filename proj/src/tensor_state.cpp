#include "iit/tensor_state.hpp"

#include <cmath>
#include <sstream>

namespace iit {

namespace {

constexpr double kCoefficientTol = 1e-9;
constexpr double kOrthoTol = 1e-9;
constexpr double kRatioTol = 1e-12;

void require_axis(const TensorState& s, std::size_t axis) {
  if (axis >= s.rank()) {
    std::ostringstream os;
    os << "axis " << axis << " out of range for rank-" << s.rank() << " state";
    throw Error(Errc::BadAxis, os.str());
  }
}

void require_same_grids(const TensorState& a, const TensorState& b, const char* what) {
  if (a.grids() != b.grids()) throw Error(Errc::GridMismatch, what);
}

}  // namespace

TensorState::TensorState(std::vector<Grid> grids, std::vector<cplx> amplitudes)
    : grids_(std::move(grids)), amps_(std::move(amplitudes)) {
  if (grids_.size() < 2 || grids_.size() > 3) {
    throw Error(Errc::Arity, "TensorState supports 2 or 3 particles");
  }
  if (amps_.size() != shape().size()) {
    throw Error(Errc::GridMismatch, "amplitude array extent does not match grids");
  }
}

TensorState TensorState::zeros(std::vector<Grid> grids) {
  std::size_t n = 1;
  for (const auto& g : grids) n *= g.size();
  return TensorState(std::move(grids), std::vector<cplx>(n));
}

const Grid& TensorState::grid(std::size_t axis) const {
  if (axis >= grids_.size()) throw Error(Errc::BadAxis, "grid(): axis out of range");
  return grids_[axis];
}

kernels::Shape3 TensorState::shape() const noexcept {
  kernels::Shape3 s;
  for (std::size_t a = 0; a < grids_.size(); ++a) s.n[a] = grids_[a].size();
  return s;
}

double TensorState::cell_volume() const noexcept {
  double v = 1.0;
  for (const auto& g : grids_) v *= g.spacing();
  return v;
}

cplx TensorState::at(std::size_t i0, std::size_t i1, std::size_t i2) const {
  const auto s = shape();
  return amps_[(i0 * s.n[1] + i1) * s.n[2] + i2];
}

double TensorState::norm_squared() const {
  return kernels::parallel::dot(amps_, amps_).real() * cell_volume();
}

TensorState product(std::span<const Wavefunction> factors) {
  if (factors.size() < 2 || factors.size() > 3) {
    throw Error(Errc::Arity, "product needs 2 or 3 factors");
  }
  std::vector<Grid> grids;
  for (const auto& f : factors) grids.push_back(f.grid());
  auto out = TensorState::zeros(std::move(grids));
  kernels::parallel::add_outer(out.mutable_amplitudes(), 1.0, factors[0].amplitudes(),
                               factors[1].amplitudes(),
                               factors.size() == 3 ? factors[2].amplitudes()
                                                   : std::span<const cplx>{});
  return out;
}

TensorState entangled_pair(cplx a, const Wavefunction& psi_plus, const Wavefunction& phi_plus,
                           cplx b, const Wavefunction& psi_minus,
                           const Wavefunction& phi_minus) {
  require_same_grid(psi_plus.grid(), psi_minus.grid(), "entangled_pair: psi+ and psi- grids");
  require_same_grid(phi_plus.grid(), phi_minus.grid(), "entangled_pair: phi+ and phi- grids");
  if (std::abs(std::norm(a) + std::norm(b) - 1.0) > kCoefficientTol) {
    throw Error(Errc::BadCoefficients, "|a|^2 + |b|^2 must equal 1");
  }
  if (std::abs(inner(psi_plus, psi_minus)) > kOrthoTol) {
    throw Error(Errc::NonOrthogonalPsi, "psi+ and psi- must be orthogonal");
  }
  auto out = TensorState::zeros({psi_plus.grid(), phi_plus.grid()});
  kernels::parallel::add_outer(out.mutable_amplitudes(), a, psi_plus.amplitudes(),
                               phi_plus.amplitudes(), {});
  kernels::parallel::add_outer(out.mutable_amplitudes(), b, psi_minus.amplitudes(),
                               phi_minus.amplitudes(), {});
  return out;
}

TensorState append_factor(const TensorState& state, const Wavefunction& f) {
  if (state.rank() != 2) throw Error(Errc::Arity, "append_factor needs a rank-2 state");
  auto grids = state.grids();
  grids.push_back(f.grid());
  auto out = TensorState::zeros(std::move(grids));
  auto dst = out.mutable_amplitudes();
  const auto src = state.amplitudes();
  const auto fa = f.amplitudes();
  const auto rows = static_cast<std::int64_t>(src.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) {
    const cplx v = src[static_cast<std::size_t>(r)];
    cplx* row = dst.data() + static_cast<std::size_t>(r) * fa.size();
    for (std::size_t k = 0; k < fa.size(); ++k) row[k] = v * fa[k];
  }
  return out;
}

std::int64_t commensurate_ratio(double strength, double src_spacing, double tgt_spacing,
                                Errc failure) {
  const double r = strength * src_spacing / tgt_spacing;
  const double ri = std::round(r);
  if (!std::isfinite(r) || std::abs(r - ri) > kRatioTol * std::max(1.0, std::abs(r))) {
    std::ostringstream os;
    os << "strength " << strength << " gives non-integral index ratio " << r
       << " (src spacing " << src_spacing << ", tgt spacing " << tgt_spacing << ")";
    throw Error(failure, os.str());
  }
  return static_cast<std::int64_t>(ri);
}

TensorState shear(const TensorState& state, std::size_t src_axis, std::size_t tgt_axis,
                  double strength) {
  require_axis(state, src_axis);
  require_axis(state, tgt_axis);
  if (src_axis == tgt_axis) throw Error(Errc::BadAxis, "shear needs distinct axes");
  const Grid& src = state.grid(src_axis);
  const std::int64_t r = commensurate_ratio(strength, src.spacing(),
                                            state.grid(tgt_axis).spacing(),
                                            Errc::IncommensurateShear);
  std::vector<std::int64_t> shift(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) shift[i] = r * src.lattice_index(i);

  auto out = TensorState::zeros(state.grids());
  if (!kernels::parallel::shear(state.amplitudes(), out.mutable_amplitudes(), state.shape(),
                                src_axis, tgt_axis, shift, kSupportThreshold)) {
    std::ostringstream os;
    os << "shear by " << strength << " along axis " << tgt_axis
       << " moves support off the grid";
    throw Error(Errc::GridOverflow, os.str());
  }
  return out;
}

Density marginal_density(const TensorState& state, std::size_t axis) {
  require_axis(state, axis);
  const double w = state.cell_volume() / state.grid(axis).spacing();
  return {state.grid(axis), kernels::parallel::marginal(state.amplitudes(), state.shape(), axis, w)};
}

cplx overlap_states(const TensorState& s1, const TensorState& s2) {
  require_same_grids(s1, s2, "overlap_states: grid tuples differ");
  return kernels::parallel::dot(s1.amplitudes(), s2.amplitudes()) * s1.cell_volume();
}

Operator1 dyad_operator(const Wavefunction& psi_plus, const Wavefunction& psi_minus,
                        const Matrix2& m) {
  require_same_grid(psi_plus.grid(), psi_minus.grid(), "dyad_operator: basis grids differ");
  if (m[0][0].imag() != 0.0 || m[1][1].imag() != 0.0 || m[0][1] != std::conj(m[1][0])) {
    throw Error(Errc::NonHermitian, "observable matrix must equal its conjugate transpose");
  }
  if (std::abs(norm(psi_plus) - 1.0) > kOrthoTol || std::abs(norm(psi_minus) - 1.0) > kOrthoTol ||
      std::abs(inner(psi_plus, psi_minus)) > kOrthoTol) {
    throw Error(Errc::NonOrthonormalBasis, "observable basis must be orthonormal");
  }
  return Operator1(psi_plus, psi_minus, m);
}

cplx expect_local_complex(const TensorState& state, std::size_t axis, const Operator1& op) {
  require_axis(state, axis);
  require_same_grid(op.plus().grid(), state.grid(axis), "expect_local: operator grid differs");
  const auto c = kernels::parallel::project_axis(state.amplitudes(), state.shape(), axis,
                                                 op.plus().amplitudes(),
                                                 op.minus().amplitudes(),
                                                 state.grid(axis).spacing());
  const double w = state.cell_volume() / state.grid(axis).spacing();
  const auto& m = op.matrix();
  using kernels::parallel::dot;
  return (m[0][0] * dot(c.plus, c.plus) + m[0][1] * dot(c.plus, c.minus) +
          m[1][0] * dot(c.minus, c.plus) + m[1][1] * dot(c.minus, c.minus)) *
         w;
}

double expect_local(const TensorState& state, std::size_t axis, const Operator1& op) {
  return expect_local_complex(state, axis, op).real();
}

}  // namespace iit
