#include "iit/effective.hpp"

#include <cmath>
#include <sstream>

#include "iit/kernels.hpp"

namespace iit {

namespace {

constexpr double kWeightTol = 1e-6;
constexpr double kNormTol = 1e-9;

void require_disjoint_orthonormal(const Wavefunction& psi_plus, const Wavefunction& psi_minus) {
  require_same_grid(psi_plus.grid(), psi_minus.grid(), "psi+ and psi- grids differ");
  for (std::size_t i = 0; i < psi_plus.size(); ++i) {
    if (std::abs(psi_plus[i]) > kSupportThreshold && std::abs(psi_minus[i]) > kSupportThreshold) {
      throw Error(Errc::NonOrthogonalPsi, "psi+ and psi- supports overlap");
    }
  }
  if (std::abs(norm(psi_plus) - 1.0) > kNormTol || std::abs(norm(psi_minus) - 1.0) > kNormTol) {
    throw Error(Errc::NonOrthonormalBasis, "psi+ and psi- must be normalized");
  }
}

EffectivePair make_pair(Wavefunction plus, Wavefunction minus) {
  const cplx g = inner(plus, minus);
  const double np = norm(plus);
  const double nm = norm(minus);
  return EffectivePair{std::move(plus), std::move(minus), g, np, nm, {1.0, 1.0}};
}

}  // namespace

EffectivePair EffectivePair::normalized() const {
  EffectivePair out = make_pair(normalize(plus), normalize(minus));
  out.spectator_mass = spectator_mass;
  return out;
}

Wavefunction weighted_shift(const Density& weight, const Wavefunction& carrier, double strength) {
  const double total = weight.total();
  if (std::abs(total - 1.0) > kWeightTol) {
    std::ostringstream os;
    os << "shift weight integrates to " << total << ", expected 1";
    throw Error(Errc::UnnormalizedWeight, os.str());
  }
  const Grid& src = weight.grid;
  const std::int64_t r = commensurate_ratio(strength, src.spacing(), carrier.grid().spacing(),
                                            Errc::IncommensurateShift);
  // Renormalizing here absorbs grid-truncation dust in the weight.
  const double scale = src.spacing() / total;
  std::vector<double> w(src.size());
  std::vector<std::int64_t> shift(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    w[i] = weight.values[i] * scale;
    shift[i] = r * src.lattice_index(i);
  }
  std::vector<cplx> out(carrier.size());
  kernels::parallel::weighted_shift(w, shift, carrier.amplitudes(), out);
  return Wavefunction(carrier.grid(), std::move(out));
}

EffectivePair make_phi_pm(const Wavefunction& psi_plus, const Wavefunction& psi_minus,
                          const Wavefunction& phi0, double d12) {
  require_disjoint_orthonormal(psi_plus, psi_minus);
  if (std::abs(norm(phi0) - 1.0) > kNormTol) {
    throw Error(Errc::ContractViolation, "phi0 must be normalized");
  }
  const Density wp{psi_plus.grid(), psi_plus.density()};
  const Density wm{psi_minus.grid(), psi_minus.density()};
  auto out = make_pair(weighted_shift(wp, phi0, d12), weighted_shift(wm, phi0, d12));
  out.spectator_mass = {wp.total(), wm.total()};
  return out;
}

EffectivePair make_chi_pm(const Wavefunction& psi_plus, const Wavefunction& psi_minus,
                          const Wavefunction& phi_plus, const Wavefunction& phi_minus,
                          const Wavefunction& chi0, double g23, double duration) {
  require_disjoint_orthonormal(psi_plus, psi_minus);
  require_same_grid(phi_plus.grid(), phi_minus.grid(), "phi+ and phi- grids differ");
  if (std::abs(norm(chi0) - 1.0) > kNormTol) {
    throw Error(Errc::ContractViolation, "chi0 must be normalized");
  }
  const double c = g23 * duration;
  auto branch = [&](const Wavefunction& psi, const Wavefunction& phi, double& q1_mass) {
    q1_mass = Density{psi.grid(), psi.density()}.total();
    Density w{phi.grid(), phi.density()};
    const double phi_mass = w.total();
    if (!(phi_mass > 0.0)) throw Error(Errc::ZeroNorm, "phi branch has zero norm");
    for (auto& v : w.values) v /= phi_mass;
    return weighted_shift(w, chi0, c).scaled(q1_mass * phi_mass);
  };
  std::array<double, 2> q1{};
  auto out = make_pair(branch(psi_plus, phi_plus, q1[0]), branch(psi_minus, phi_minus, q1[1]));
  out.spectator_mass = q1;
  return out;
}

TensorState effective_tripartite(cplx a, cplx b, const Wavefunction& psi_plus,
                                 const Wavefunction& psi_minus, const EffectivePair& phi,
                                 const EffectivePair& chi) {
  require_same_grid(psi_plus.grid(), psi_minus.grid(), "effective_tripartite: psi grids");
  require_same_grid(phi.plus.grid(), phi.minus.grid(), "effective_tripartite: phi grids");
  require_same_grid(chi.plus.grid(), chi.minus.grid(), "effective_tripartite: chi grids");
  if (std::abs(std::norm(a) + std::norm(b) - 1.0) > 1e-9) {
    throw Error(Errc::BadCoefficients, "|a|^2 + |b|^2 must equal 1");
  }
  auto out = TensorState::zeros({psi_plus.grid(), phi.plus.grid(), chi.plus.grid()});
  kernels::parallel::add_outer(out.mutable_amplitudes(), a, psi_plus.amplitudes(),
                               phi.plus.amplitudes(), chi.plus.amplitudes());
  kernels::parallel::add_outer(out.mutable_amplitudes(), b, psi_minus.amplitudes(),
                               phi.minus.amplitudes(), chi.minus.amplitudes());
  return out;
}

}  // namespace iit
