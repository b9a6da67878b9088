#pragma once

#include <array>

#include "iit/grid.hpp"
#include "iit/tensor_state.hpp"

namespace iit {

/// Branch states of one particle and their overlap.
///
/// `gamma` is the raw overlap <plus|minus>; the constructions below do not
/// produce unit-norm states, so `normalized_gamma()` divides out the norms.
struct EffectivePair {
  Wavefunction plus;
  Wavefunction minus;
  cplx gamma;
  double norm_plus = 0.0;
  double norm_minus = 0.0;
  /// Integral of the spectator (particle 1) weight per branch; exactly the
  /// q(1) factor of the tripartite construction, 1 for a pair built from it alone.
  std::array<double, 2> spectator_mass{1.0, 1.0};

  cplx normalized_gamma() const { return gamma / (norm_plus * norm_minus); }
  /// Both branches rescaled to unit norm.
  EffectivePair normalized() const;
};

/// out(q) = sum_i weight_i * dq_src * carrier(q - strength * q_src,i).
///
/// The weight must integrate to 1; deviations up to 1e-6 are renormalized away.
Wavefunction weighted_shift(const Density& weight, const Wavefunction& carrier, double strength);

/// phi_s = weighted_shift(|psi_s|^2, phi0, d12) for s = +, -.
EffectivePair make_phi_pm(const Wavefunction& psi_plus, const Wavefunction& psi_minus,
                          const Wavefunction& phi0, double d12);

/// chi_s = int |psi_s|^2 dq1 * int |phi_s|^2 chi0(q3 - g23 T q2) dq2.
EffectivePair make_chi_pm(const Wavefunction& psi_plus, const Wavefunction& psi_minus,
                          const Wavefunction& phi_plus, const Wavefunction& phi_minus,
                          const Wavefunction& chi0, double g23, double duration);

/// a psi+ phi+ chi+ + b psi- phi- chi-.
TensorState effective_tripartite(cplx a, cplx b, const Wavefunction& psi_plus,
                                 const Wavefunction& psi_minus, const EffectivePair& phi,
                                 const EffectivePair& chi);

}  // namespace iit
