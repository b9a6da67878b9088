#pragma once

#include <complex>

#include "iit/grid.hpp"

namespace iit {

/// Coefficients and matrix elements entering Bob's expectation values.
struct SignalInputs {
  cplx a{};
  cplx b{};
  cplx gamma2{};
  cplx gamma3{};
  cplx alpha{};  // <psi+|A|psi->
  double a_pp = 0.0;
  double a_mm = 0.0;
};

/// Bob's <A(1)> when particles 2 and 3 interacted.
double expectation_with_interaction(const SignalInputs& s);
/// Bob's <A(1)> when they did not (gamma3 replaced by 1).
double expectation_without_interaction(const SignalInputs& s);
/// expectation_without_interaction - expectation_with_interaction.
double delta(const SignalInputs& s);

/// Gaussian branch states of particle 2 and Carol's Gaussian particle 3.
struct GaussianScenario {
  double m_plus = 1.0;
  double m_minus = -1.0;
  double sigma2 = 1.0;  // shared variance of phi+ and phi-
  double beta2 = 1.0;   // variance of chi0
  double g23 = 1.0;
  double duration = 1.0;

  double coupling_product() const { return g23 * duration; }
  double G() const { return g23 * g23 * duration * duration / 2.0; }
  double K() const { return beta2 + G() * sigma2; }
  double M() const;
  /// Copy with g23 * duration chosen so that G() equals `G`.
  GaussianScenario with_G(double G) const;
};

void validate_scenario(const GaussianScenario& sc);

/// beta^-1 exp(-M G), evaluated verbatim (can exceed 1 for beta < 1).
double gamma3_closed_form(const GaussianScenario& sc);

struct OracleOptions {
  double tolerance = 1e-11;  // change between successive resolution doublings
  int min_nodes = 32;
  int max_nodes = 4096;
};

/// Normalized overlap <chi+|chi->/(|chi+||chi-|) of the Gaussian branch states,
/// by nested trapezoid quadrature of the defining shift integral, refined until
/// doubling the resolution changes the value by less than the tolerance.
double gamma3_oracle(const GaussianScenario& sc,
                     VarianceConvention conv = VarianceConvention::Density,
                     const OracleOptions& opts = {});

/// Oracle value at G -> infinity, estimated at G = 1e6.
double gamma3_oracle_asymptote(const GaussianScenario& sc,
                               VarianceConvention conv = VarianceConvention::Density);

/// 1 - delta / (2 a b gamma2 alpha) for real inputs.
double invert_delta_to_gamma3(double delta, double a, double b, double gamma2, double alpha);

enum class InversionMode { ClosedForm, Oracle };

/// G >= 0 with forward(G) = gamma3_target, by bisection on the decreasing forward map.
double invert_gamma3_to_G(double gamma3_target, const GaussianScenario& sc_template,
                          InversionMode mode,
                          VarianceConvention conv = VarianceConvention::Density);

}  // namespace iit
