#pragma once

#include <array>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "iit/analytics.hpp"
#include "iit/effective.hpp"
#include "iit/grid.hpp"
#include "iit/tensor_state.hpp"

namespace iit {

/// Impulsive couplings and the timeline t0 < t1 <= t2 < t3 <= t4.
struct CouplingSchedule {
  double g12 = 1.0;
  double t0 = 0.0;
  double t1 = 1.0;
  double t2 = 1.0;
  double t3 = 2.0;
  double t4 = 3.0;
  double g23 = 1.0;
  /// Whether the long-range 1-2 interaction is still non-negligible while 2 and 3 interact.
  bool vr_active_during_vn23 = true;

  double d12() const { return g12 * (t1 - t0); }
  double duration() const { return t3 - t2; }
  double c23() const { return g23 * duration(); }
};

struct GaussianSpec {
  double mean = 0.0;
  double variance = 1.0;
};

struct Preparation {
  cplx a{1.0 / std::numbers::sqrt2, 0.0};
  cplx b{1.0 / std::numbers::sqrt2, 0.0};
  SupportSpec psi_plus{-2.5, -1.5};
  SupportSpec psi_minus{1.5, 2.5};
  GaussianSpec phi0{};
};

enum class Profile { Compact, Full };

/// Which overlaps feed the formula block of a report.
enum class GammaMode { Normalized, Raw };

struct ProtocolConfig {
  Preparation prep;
  CouplingSchedule schedule;
  bool alice_switch = true;
  double beta2 = 1.0;  // Carol's chi0: Gaussian, mean 0
  Matrix2 observable{{{cplx{0.5}, cplx{0.5}}, {cplx{0.5}, cplx{0.5}}}};
  Profile profile = Profile::Compact;
  VarianceConvention convention = VarianceConvention::Density;
  GammaMode gamma_mode = GammaMode::Normalized;
  double detection_threshold = 1e-4;
  /// Explicit grids; when absent they are derived by plan_grids.
  std::optional<std::array<Grid, 3>> grids;
};

ProtocolConfig default_config();

struct GridPlan {
  std::vector<Grid> grids;  // axes 1, 2, 3
  std::int64_t r12 = 0;  // axis-2 index shift per axis-1 lattice step
  std::int64_t r23 = 0;  // axis-3 index shift per axis-2 lattice step
  std::string derivation;
};

/// Commensurate grids for the configured shear strengths, padded so that
/// neither shear moves support off-grid.
GridPlan plan_grids(const ProtocolConfig& config);

struct Diagnostic {
  std::string code;
  std::string message;
};

struct Validation {
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
  bool has(const std::string& code) const;
  std::string summary() const;
};

Validation validate(const ProtocolConfig& config);

struct NormAudit {
  double phi_plus = 0.0;
  double phi_minus = 0.0;
  double chi_plus = 0.0;
  double chi_minus = 0.0;
  std::array<double, 2> q1_integral_deviation{};
  bool young_bound_ok = false;
};

struct FormulaBlock {
  GammaMode mode = GammaMode::Normalized;
  double gamma2 = 0.0;
  double gamma3 = 0.0;
  double expectation_with = 0.0;
  double expectation_without = 0.0;
  double delta = 0.0;
};

struct ProtocolReport {
  bool alice_switch = false;
  GridPlan plan;

  double gamma2 = 0.0;  // normalized overlaps of the physical branch states
  double gamma2_raw = 0.0;
  double gamma3_effective = 0.0;
  double gamma3_raw = 0.0;
  double gamma3_oracle = 0.0;
  double gamma3_closed_form = 0.0;
  bool closed_form_exceeds_one = false;
  double oracle_over_closed_form = 0.0;
  GaussianScenario scenario;

  double alpha = 0.0;
  double a_pp = 0.0;
  double a_mm = 0.0;

  /// Bob's grid-measured <A(1)> for the configured branch.
  double expectation_with = 0.0;
  /// Reference value had 2 and 3 not interacted.
  double expectation_without = 0.0;
  double expectation_formula_with = 0.0;
  double expectation_formula_without = 0.0;
  double delta_measured = 0.0;
  bool decision_detected = false;

  /// <A(1)> on the exactly sheared tripartite state (switch on only).
  std::optional<double> expectation_exact_dynamics;
  std::optional<double> tripartite_exact_vs_effective_overlap;
  double bipartite_exact_vs_effective_overlap = 0.0;
  double axis1_marginal_mismatch = 0.0;

  std::optional<double> gamma3_recovered;
  double G_configured = 0.0;
  std::optional<double> G_recovered;
  bool inversion_out_of_range = false;
  std::string inversion_note;

  FormulaBlock formula;
  NormAudit norms;
};

/// Executes the full timeline; throws ValidationFailed, GridOverflow,
/// ConsistencyFailure and friends.
ProtocolReport run(const ProtocolConfig& config);

/// Bob's tripartite state at t4: the effective form with the switch on, pair (x) chi0 otherwise.
TensorState final_state(const ProtocolConfig& config);

/// Yes iff |reference_without - measured| exceeds the threshold.
bool detect_decision(double e_measured, double e_reference_without, double threshold);

struct ScanRow {
  double beta2 = 0.0;
  double gamma3 = 0.0;
  double bob_expectation = 0.0;
  double alice_marginal_tv = 0.0;  // against the first row
};

struct ScanReport {
  std::vector<ScanRow> rows;
  double max_pairwise_tv = 0.0;
  double bob_spread = 0.0;
};

/// Carol varies beta^2; reports Bob's expectation and Alice's particle-2 marginal per value.
ScanReport nonlocality_scan(const ProtocolConfig& config, const std::vector<double>& betas);

/// Total-variation distance between two densities on the same grid.
double total_variation(const Density& p, const Density& q);

inline constexpr std::array<const char*, 6> kSweepParameters{"g12",   "g23",    "T",
                                                              "beta2", "sigma2", "a-weight"};

/// Copy of `config` with one sweepable parameter set; throws InvalidConfig for unknown names.
ProtocolConfig with_parameter(const ProtocolConfig& config, const std::string& name, double value);

struct SweepRow {
  double value = 0.0;
  ProtocolReport report;
};

/// Runs one config per value across worker threads; rows come back in value order.
std::vector<SweepRow> sweep(const ProtocolConfig& config, const std::string& name,
                            const std::vector<double>& values, unsigned workers = 0);

}  // namespace iit
