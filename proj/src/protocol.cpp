#include "iit/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

namespace iit {

namespace {

constexpr double kConsistencyTol = 1e-6;
constexpr double kAlphaFloor = 1e-6;
// Gaussian samples below this modulus may be dropped by a shear.
constexpr double kTailAmplitude = 1e-17;

struct ProfileResolution {
  double bump_intervals;   // axis-1 spacing = narrowest bump width / this
  double points_per_sd;    // axes 2, 3: spacing <= density sd / this
};

ProfileResolution resolution(Profile p) {
  return p == Profile::Compact ? ProfileResolution{8.0, 4.0} : ProfileResolution{16.0, 8.0};
}

// Distance from the mean beyond which a normalized Gaussian amplitude drops below kTailAmplitude.
double tail_radius(double density_var) {
  const double peak = std::pow(2.0 * std::numbers::pi * density_var, -0.25);
  const double r = std::sqrt(4.0 * density_var * std::log(std::max(peak / kTailAmplitude, 1.0)));
  return std::max(r, 6.5 * std::sqrt(density_var));
}

Grid lattice_cover(double lo, double hi, double spacing) {
  const auto first = static_cast<std::int64_t>(std::floor(lo / spacing));
  const auto last = static_cast<std::int64_t>(std::ceil(hi / spacing));
  return Grid::from_lattice(first, static_cast<std::size_t>(last - first + 1), spacing);
}

bool is_real(cplx z) { return z.imag() == 0.0; }

void require_consistent(double grid_value, double formula_value, const char* what) {
  if (std::abs(grid_value - formula_value) > kConsistencyTol) {
    std::ostringstream os;
    os << what << ": grid contraction " << grid_value << " vs formula " << formula_value;
    throw Error(Errc::ConsistencyFailure, os.str());
  }
}

// Single-particle pieces shared by run() and nonlocality_scan().
struct Branches {
  GridPlan plan;
  Wavefunction psi_plus;
  Wavefunction psi_minus;
  Wavefunction phi0;
  EffectivePair phi_raw;
  EffectivePair phi;  // normalized
  Operator1 observable;
};

Branches prepare_branches(const ProtocolConfig& config, GridPlan plan) {
  const auto& prep = config.prep;
  auto psi_plus = bump_wf(plan.grids[0], prep.psi_plus);
  auto psi_minus = bump_wf(plan.grids[0], prep.psi_minus);
  auto phi0 = gaussian_wf(plan.grids[1], prep.phi0.mean, prep.phi0.variance, config.convention);
  auto phi_raw = make_phi_pm(psi_plus, psi_minus, phi0, config.schedule.d12());
  auto phi = phi_raw.normalized();
  auto op = dyad_operator(psi_plus, psi_minus, config.observable);
  return Branches{std::move(plan), std::move(psi_plus), std::move(psi_minus), std::move(phi0),
                  std::move(phi_raw), std::move(phi), std::move(op)};
}

EffectivePair chi_pair(const ProtocolConfig& config, const Branches& br, const Grid& axis3,
                       double beta2) {
  auto chi0 = gaussian_wf(axis3, 0.0, beta2, config.convention);
  return make_chi_pm(br.psi_plus, br.psi_minus, br.phi_raw.plus, br.phi_raw.minus, chi0,
                     config.schedule.g23, config.schedule.duration());
}

GaussianScenario scenario_from(const ProtocolConfig& config, const EffectivePair& phi) {
  const auto mp = density_moments(phi.plus);
  const auto mm = density_moments(phi.minus);
  const double var_density = 0.5 * (mp.variance + mm.variance);
  GaussianScenario sc;
  sc.m_plus = mp.mean;
  sc.m_minus = mm.mean;
  sc.sigma2 = config.convention == VarianceConvention::Density ? var_density : 2.0 * var_density;
  sc.beta2 = config.beta2;
  sc.g23 = config.schedule.g23;
  sc.duration = config.schedule.duration();
  return sc;
}

SignalInputs signal_inputs(const ProtocolConfig& config, const Operator1& op, cplx gamma2,
                           cplx gamma3) {
  return SignalInputs{config.prep.a, config.prep.b, gamma2, gamma3,
                      op.alpha(),    op.a_pp(),     op.a_mm()};
}

}  // namespace

ProtocolConfig default_config() { return ProtocolConfig{}; }

GridPlan plan_grids(const ProtocolConfig& config) {
  const auto& prep = config.prep;
  const auto& sch = config.schedule;
  GridPlan plan;
  std::ostringstream why;

  if (config.grids) {
    const auto& g = *config.grids;
    plan.grids.assign(g.begin(), g.end());
    plan.r12 = commensurate_ratio(sch.d12(), g[0].spacing(), g[1].spacing(),
                                  Errc::IncommensurateShear);
    plan.r23 = commensurate_ratio(sch.c23(), g[1].spacing(), g[2].spacing(),
                                  Errc::IncommensurateShear);
    why << "explicit grids; r12 = " << plan.r12 << ", r23 = " << plan.r23;
    plan.derivation = why.str();
    return plan;
  }

  const auto res = resolution(config.profile);
  const double lo1 = std::min(prep.psi_plus.lo, prep.psi_minus.lo);
  const double hi1 = std::max(prep.psi_plus.hi, prep.psi_minus.hi);
  const double h1 = std::min(prep.psi_plus.width(), prep.psi_minus.width()) / res.bump_intervals;
  // One extra lattice point on each side keeps the supports strictly inside.
  const Grid g1 = lattice_cover(lo1 - h1, hi1 + h1, h1);

  const double d12 = sch.d12();
  const double var2 = density_variance(prep.phi0.variance, config.convention);
  const double target2 = std::sqrt(var2) / res.points_per_sd;
  double h2 = target2;
  if (d12 > 0.0) {
    plan.r12 = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(d12 * h1 / target2)));
    h2 = d12 * h1 / static_cast<double>(plan.r12);
  }
  const double reach2 = tail_radius(var2);
  const double lo2 = prep.phi0.mean + std::min(0.0, d12 * g1.min()) - reach2;
  const double hi2 = prep.phi0.mean + std::max(0.0, d12 * g1.max()) + reach2;
  const Grid g2 = lattice_cover(lo2, hi2, h2);

  const double c23 = sch.c23();
  const double var3 = density_variance(config.beta2, config.convention);
  const double target3 = std::sqrt(var3) / res.points_per_sd;
  double h3 = target3;
  if (c23 > 0.0) {
    plan.r23 = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(c23 * h2 / target3)));
    h3 = c23 * h2 / static_cast<double>(plan.r23);
  }
  const double reach3 = tail_radius(var3);
  const double lo3 = std::min(0.0, c23 * g2.min()) - reach3;
  const double hi3 = std::max(0.0, c23 * g2.max()) + reach3;
  const Grid g3 = lattice_cover(lo3, hi3, h3);

  plan.grids = {g1, g2, g3};
  why << "axis1: spacing " << h1 << " = narrowest bump width / " << res.bump_intervals << ", "
      << g1.size() << " points; axis2: spacing = d12 * dq1 / r12 with d12 = " << d12
      << ", r12 = " << plan.r12 << ", " << g2.size() << " points on [" << g2.min() << ", "
      << g2.max() << "]; axis3: spacing = c23 * dq2 / r23 with c23 = " << c23
      << ", r23 = " << plan.r23 << ", " << g3.size() << " points on [" << g3.min() << ", "
      << g3.max() << "]";
  plan.derivation = why.str();
  return plan;
}

bool Validation::has(const std::string& code) const {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [&](const Diagnostic& d) { return d.code == code; });
}

std::string Validation::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < diagnostics.size(); ++i) {
    if (i) os << "; ";
    os << "[" << diagnostics[i].code << "] " << diagnostics[i].message;
  }
  return os.str();
}

Validation validate(const ProtocolConfig& config) {
  Validation v;
  auto add = [&](const char* code, std::string msg) {
    v.diagnostics.push_back({code, std::move(msg)});
  };
  const auto& s = config.schedule;
  const auto& prep = config.prep;

  if (config.alice_switch && !s.vr_active_during_vn23) {
    add("vr_gating",
        "alice_switch = true needs the long-range 1-2 coupling to remain active while "
        "particles 2 and 3 interact; no tripartite branch state is defined otherwise");
  }
  if (!(s.t0 < s.t1 && s.t1 <= s.t2 && s.t2 < s.t3 && s.t3 <= s.t4)) {
    add("time_order", "times must satisfy t0 < t1 <= t2 < t3 <= t4");
  }
  if (!(s.g12 >= 0.0) || !(s.g23 >= 0.0)) add("negative_coupling", "g12 and g23 must be >= 0");
  if (std::abs(std::norm(prep.a) + std::norm(prep.b) - 1.0) > 1e-9) {
    add("bad_coefficients", "|a|^2 + |b|^2 must equal 1");
  }
  if (!(prep.psi_plus.lo < prep.psi_plus.hi) || !(prep.psi_minus.lo < prep.psi_minus.hi)) {
    add("bad_support", "support intervals need lo < hi");
  } else if (!(support_gap(prep.psi_plus, prep.psi_minus) > 0.0)) {
    add("support_overlap", "psi+ and psi- supports must be disjoint with a positive gap");
  }
  if (!(prep.phi0.variance > 0.0) || !(config.beta2 > 0.0)) {
    add("nonpositive_variance", "phi0 variance and beta2 must be positive");
  }
  const auto& m = config.observable;
  if (m[0][0].imag() != 0.0 || m[1][1].imag() != 0.0 || m[0][1] != std::conj(m[1][0])) {
    add("nonhermitian_observable", "observable matrix must be Hermitian");
  } else if (!(std::abs(m[0][1]) > kAlphaFloor)) {
    add("alpha_zero", "observable has <psi+|A|psi-> = 0 and cannot reveal the signal");
  }
  if (!(config.detection_threshold > 0.0)) add("bad_threshold", "detection threshold must be > 0");
  if (config.grids) {
    const auto& g = *config.grids;
    try {
      commensurate_ratio(s.d12(), g[0].spacing(), g[1].spacing(), Errc::IncommensurateShear);
      commensurate_ratio(s.c23(), g[1].spacing(), g[2].spacing(), Errc::IncommensurateShear);
    } catch (const Error& e) {
      add("incommensurate_shear", e.what());
    }
  }
  return v;
}

bool detect_decision(double e_measured, double e_reference_without, double threshold) {
  if (!(threshold > 0.0)) throw Error(Errc::ContractViolation, "detection threshold must be > 0");
  return std::abs(e_reference_without - e_measured) > threshold;
}

ProtocolReport run(const ProtocolConfig& config) {
  const auto v = validate(config);
  if (!v.ok()) throw Error(Errc::ValidationFailed, v.summary());

  const auto& sch = config.schedule;
  const auto& prep = config.prep;
  ProtocolReport rep;
  rep.alice_switch = config.alice_switch;

  // (1) particle-1 superposition and particle-2 pointer state
  Branches br = prepare_branches(config, plan_grids(config));
  const auto zeta = superpose(prep.a, br.psi_plus, prep.b, br.psi_minus);

  // (2) bipartite stage: exact shear alongside the effective factorized form
  const std::array<Wavefunction, 2> initial{zeta, br.phi0};
  const auto exact2 = shear(product(initial), 0, 1, sch.d12());
  const auto eff2 = entangled_pair(prep.a, br.psi_plus, br.phi.plus, prep.b, br.psi_minus,
                                   br.phi.minus);
  rep.bipartite_exact_vs_effective_overlap = overlap_states(exact2, eff2).real();
  {
    const auto pe = marginal_density(exact2, 0);
    const auto pf = marginal_density(eff2, 0);
    double worst = 0.0;
    for (std::size_t i = 0; i < pe.values.size(); ++i)
      worst = std::max(worst, std::abs(pe.values[i] - pf.values[i]));
    rep.axis1_marginal_mismatch = worst;
  }

  // (3) particle 3 branch states; computed for both choices so reports compare
  const Grid& axis3 = br.plan.grids[2];
  const auto chi0 = gaussian_wf(axis3, 0.0, config.beta2, config.convention);
  const auto chi_raw = make_chi_pm(br.psi_plus, br.psi_minus, br.phi_raw.plus,
                                   br.phi_raw.minus, chi0, sch.g23, sch.duration());
  const auto chi = chi_raw.normalized();

  rep.gamma2 = br.phi.gamma.real();
  rep.gamma2_raw = br.phi_raw.gamma.real();
  rep.gamma3_effective = chi.gamma.real();
  rep.gamma3_raw = chi_raw.gamma.real();
  rep.alpha = br.observable.alpha().real();
  rep.a_pp = br.observable.a_pp();
  rep.a_mm = br.observable.a_mm();

  const auto inputs = signal_inputs(config, br.observable, br.phi.gamma, chi.gamma);
  rep.expectation_formula_with = expectation_with_interaction(inputs);
  rep.expectation_formula_without = expectation_without_interaction(inputs);

  // (4) Bob's measurement by grid contraction, checked against the formulas
  const double without_grid = expect_local(eff2, 0, br.observable) * norm(chi0) * norm(chi0);
  require_consistent(without_grid, rep.expectation_formula_without, "no-interaction reference");
  if (config.alice_switch) {
    // Exact state first: the unsheared temporary dies before eff3 exists, keeping two rank-3 arrays alive at most.
    const auto exact3 = shear(append_factor(eff2, chi0), 1, 2, sch.c23());
    rep.expectation_exact_dynamics = expect_local(exact3, 0, br.observable);
    const auto eff3 = effective_tripartite(prep.a, prep.b, br.psi_plus, br.psi_minus, br.phi, chi);
    rep.expectation_with = expect_local(eff3, 0, br.observable);
    require_consistent(rep.expectation_with, rep.expectation_formula_with, "interaction branch");
    rep.tripartite_exact_vs_effective_overlap = overlap_states(exact3, eff3).real();
  } else {
    const auto primed = append_factor(eff2, chi0);
    rep.expectation_with = expect_local(primed, 0, br.observable);
    require_consistent(rep.expectation_with, rep.expectation_formula_without, "no-interaction branch");
  }
  rep.expectation_without = rep.expectation_formula_without;
  rep.delta_measured = rep.expectation_without - rep.expectation_with;
  rep.decision_detected =
      detect_decision(rep.expectation_with, rep.expectation_without, config.detection_threshold);

  // (5) formula block, closed-form comparison and Bob's inversions
  const bool raw = config.gamma_mode == GammaMode::Raw;
  const auto fin = signal_inputs(config, br.observable, raw ? br.phi_raw.gamma : br.phi.gamma,
                                 raw ? chi_raw.gamma : chi.gamma);
  rep.formula = FormulaBlock{config.gamma_mode,
                             fin.gamma2.real(),
                             fin.gamma3.real(),
                             expectation_with_interaction(fin),
                             expectation_without_interaction(fin),
                             delta(fin)};

  rep.scenario = scenario_from(config, br.phi);
  rep.G_configured = rep.scenario.G();
  rep.gamma3_oracle = gamma3_oracle(rep.scenario, config.convention);
  rep.gamma3_closed_form = gamma3_closed_form(rep.scenario);
  rep.closed_form_exceeds_one = rep.gamma3_closed_form > 1.0;
  rep.oracle_over_closed_form = rep.gamma3_oracle / rep.gamma3_closed_form;

  if (is_real(prep.a) && is_real(prep.b) && is_real(br.phi.gamma) &&
      is_real(br.observable.alpha())) {
    try {
      rep.gamma3_recovered = invert_delta_to_gamma3(rep.delta_measured, prep.a.real(),
                                                    prep.b.real(), rep.gamma2, rep.alpha);
    } catch (const Error& e) {
      rep.inversion_note = e.what();
    }
  } else {
    rep.inversion_note = "complex preparation: scalar inversion skipped";
  }
  if (config.alice_switch && rep.decision_detected && rep.gamma3_recovered) {
    try {
      rep.G_recovered = invert_gamma3_to_G(*rep.gamma3_recovered, rep.scenario,
                                           InversionMode::Oracle, config.convention);
    } catch (const Error& e) {
      rep.inversion_out_of_range = e.code() == Errc::OutOfRange;
      rep.inversion_note = e.what();
    }
  }

  rep.norms.phi_plus = br.phi_raw.norm_plus;
  rep.norms.phi_minus = br.phi_raw.norm_minus;
  rep.norms.chi_plus = chi_raw.norm_plus;
  rep.norms.chi_minus = chi_raw.norm_minus;
  rep.norms.q1_integral_deviation = {1.0 - chi_raw.spectator_mass[0],
                                     1.0 - chi_raw.spectator_mass[1]};
  rep.norms.young_bound_ok = rep.norms.phi_plus <= 1.0 + 1e-9 &&
                             rep.norms.phi_minus <= 1.0 + 1e-9 &&
                             rep.norms.chi_plus <= 1.0 + 1e-9 && rep.norms.chi_minus <= 1.0 + 1e-9;
  rep.plan = std::move(br.plan);
  return rep;
}

TensorState final_state(const ProtocolConfig& config) {
  const auto v = validate(config);
  if (!v.ok()) throw Error(Errc::ValidationFailed, v.summary());
  const Branches br = prepare_branches(config, plan_grids(config));
  const auto& prep = config.prep;
  if (!config.alice_switch) {
    const auto chi0 = gaussian_wf(br.plan.grids[2], 0.0, config.beta2, config.convention);
    return append_factor(entangled_pair(prep.a, br.psi_plus, br.phi.plus, prep.b, br.psi_minus,
                                        br.phi.minus),
                         chi0);
  }
  const auto chi = chi_pair(config, br, br.plan.grids[2], config.beta2).normalized();
  return effective_tripartite(prep.a, prep.b, br.psi_plus, br.psi_minus, br.phi, chi);
}

double total_variation(const Density& p, const Density& q) {
  require_same_grid(p.grid, q.grid, "total_variation: densities on different grids");
  double s = 0.0;
  for (std::size_t i = 0; i < p.values.size(); ++i) s += std::abs(p.values[i] - q.values[i]);
  return 0.5 * s * p.grid.spacing();
}

ScanReport nonlocality_scan(const ProtocolConfig& config, const std::vector<double>& betas) {
  if (betas.empty()) throw Error(Errc::ContractViolation, "nonlocality_scan needs >= 1 beta");
  if (!config.alice_switch) {
    throw Error(Errc::ContractViolation, "nonlocality_scan needs alice_switch = true");
  }
  const auto v = validate(config);
  if (!v.ok()) throw Error(Errc::ValidationFailed, v.summary());

  const Branches br = prepare_branches(config, plan_grids(config));
  ScanReport rep;
  std::vector<Density> marginals;
  for (double beta2 : betas) {
    ProtocolConfig c = config;
    c.beta2 = beta2;
    const auto plan = plan_grids(c);
    const auto chi = chi_pair(c, br, plan.grids[2], beta2).normalized();
    const auto eff3 = effective_tripartite(c.prep.a, c.prep.b, br.psi_plus, br.psi_minus, br.phi, chi);
    ScanRow row;
    row.beta2 = beta2;
    row.gamma3 = chi.gamma.real();
    row.bob_expectation = expect_local(eff3, 0, br.observable);
    marginals.push_back(marginal_density(eff3, 1));
    row.alice_marginal_tv = total_variation(marginals.front(), marginals.back());
    rep.rows.push_back(row);
  }
  for (std::size_t i = 0; i < marginals.size(); ++i)
    for (std::size_t j = i + 1; j < marginals.size(); ++j)
      rep.max_pairwise_tv = std::max(rep.max_pairwise_tv, total_variation(marginals[i], marginals[j]));
  const auto [lo, hi] = std::minmax_element(
      rep.rows.begin(), rep.rows.end(),
      [](const ScanRow& a, const ScanRow& b) { return a.bob_expectation < b.bob_expectation; });
  rep.bob_spread = hi->bob_expectation - lo->bob_expectation;
  return rep;
}

ProtocolConfig with_parameter(const ProtocolConfig& config, const std::string& name, double value) {
  ProtocolConfig c = config;
  if (name == "g12") {
    c.schedule.g12 = value;
  } else if (name == "g23") {
    c.schedule.g23 = value;
  } else if (name == "T") {
    c.schedule.t3 = c.schedule.t2 + value;
    c.schedule.t4 = std::max(c.schedule.t4, c.schedule.t3);
  } else if (name == "beta2") {
    c.beta2 = value;
  } else if (name == "sigma2") {
    c.prep.phi0.variance = value;
  } else if (name == "a-weight") {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw Error(Errc::InvalidConfig, "a-weight must lie in [0, 1]");
    }
    c.prep.a = std::sqrt(value);
    c.prep.b = std::sqrt(1.0 - value);
  } else {
    throw Error(Errc::InvalidConfig, "unknown sweep parameter '" + name + "'");
  }
  return c;
}

std::vector<SweepRow> sweep(const ProtocolConfig& config, const std::string& name,
                            const std::vector<double>& values, unsigned workers) {
  std::vector<ProtocolConfig> configs;
  configs.reserve(values.size());
  for (double v : values) configs.push_back(with_parameter(config, name, v));

  std::vector<SweepRow> rows(values.size());
  std::vector<std::exception_ptr> errors(values.size());
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(values.size()));

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      try {
        rows[i] = SweepRow{values[i], run(configs[i])};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

}  // namespace iit
