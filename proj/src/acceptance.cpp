#include "iit/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "iit/analytics.hpp"
#include "iit/serialize.hpp"

namespace iit {

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// Exact bipartite shear on a 257 x 257 lattice against the pointwise closed form.
Outcome check_exact_shear() {
  const Grid g1 = Grid::from_lattice(-128, 257, 10.0 / 256.0);
  const Grid g2 = Grid::from_lattice(-128, 257, 40.0 / 256.0);
  const double d = 4.0;
  const double var = 0.5;
  const cplx a{1.0 / std::sqrt(2.0), 0.0};
  const cplx b = a;
  const auto psi_p = bump_wf(g1, {-2.5, -1.5});
  const auto psi_m = bump_wf(g1, {1.5, 2.5});
  const auto phi0 = gaussian_wf(g2, 0.0, var);
  const auto zeta = superpose(a, psi_p, b, psi_m);
  const std::array<Wavefunction, 2> factors{zeta, phi0};
  const auto before = product(factors);
  const auto after = shear(before, 0, 1, d);

  // phi0 sampled from its formula; the grid renormalization constant is read off at q = 0.
  const double peak = phi0[128].real();
  double worst = 0.0;
  for (std::size_t i = 0; i < g1.size(); ++i) {
    for (std::size_t j = 0; j < g2.size(); ++j) {
      const double x = g2.point(j) - d * g1.point(i);
      const double phi = peak * std::exp(-x * x / (4.0 * var));
      const cplx expected = a * psi_p[i] * phi + b * psi_m[i] * phi;
      worst = std::max(worst, std::abs(after.at(i, j) - expected));
    }
  }
  const double dn = std::abs(after.norm_squared() - before.norm_squared());
  return {worst <= 1e-12 && dn <= 1e-12,
          "257x257, max pointwise error " + fmt(worst) + ", norm change " + fmt(dn)};
}

Outcome check_formula_grid(Profile profile) {
  std::ostringstream os;
  bool ok = true;
  double worst = 0.0;
  for (double c : {0.25, 0.5, 1.0, 1.5, 2.0}) {
    auto cfg = default_config();
    cfg.profile = profile;
    cfg.schedule.g23 = c;
    const auto r = run(cfg);
    const double err = std::abs(r.expectation_with - r.expectation_formula_with);
    worst = std::max(worst, err);
    ok = ok && err <= 1e-8;
    const auto& g = r.plan.grids;
    os << "c=" << c << " (" << g[0].size() << "x" << g[1].size() << "x" << g[2].size() << ") ";
  }
  os << "max |grid - formula| " << fmt(worst);
  return {ok, os.str()};
}

Outcome check_delta_identities() {
  const double r = 1.0 / std::sqrt(2.0);
  auto base = SignalInputs{r, r, 0.5, 0.8, 0.5, 0.3, -0.2};
  double worst_zero = 0.0;
  auto zero_case = [&](SignalInputs s) { worst_zero = std::max(worst_zero, std::abs(delta(s))); };
  auto s = base;
  s.gamma2 = 0.0;
  zero_case(s);
  s = base;
  s.gamma3 = 1.0;
  zero_case(s);
  s = base;
  s.a = 0.0;
  s.b = 1.0;
  zero_case(s);
  s = base;
  s.a = 1.0;
  s.b = 0.0;
  zero_case(s);
  s = base;
  s.alpha = 0.0;
  zero_case(s);

  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  double worst_random = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double t = std::abs(u(rng)) * std::numbers::pi / 2.0;
    SignalInputs x;
    x.a = std::polar(std::cos(t), phase(rng));
    x.b = std::polar(std::sin(t), phase(rng));
    x.gamma2 = std::polar(std::abs(u(rng)), phase(rng));
    x.gamma3 = std::polar(std::abs(u(rng)), phase(rng));
    x.alpha = {u(rng), u(rng)};
    x.a_pp = u(rng);
    x.a_mm = u(rng);
    const double expected = 2.0 * (std::conj(x.a) * x.b * x.gamma2 * (1.0 - x.gamma3) * x.alpha).real();
    worst_random = std::max(worst_random, std::abs(delta(x) - expected));
  }
  const double worked = delta(base);
  const bool ok = worst_zero <= 1e-12 && worst_random <= 1e-12 && std::abs(worked - 0.05) <= 1e-12;
  return {ok, "zero cases " + fmt(worst_zero) + ", 1000 random " + fmt(worst_random) +
                  ", worked instance " + fmt(worked)};
}

Outcome check_gamma3_audit() {
  GaussianScenario sc;
  bool ok = true;
  std::ostringstream os;

  double prev = 2.0;
  double lowest = 1.0;
  for (int k = 0; k < 20; ++k) {
    const double G = 10.0 * k / 19.0;
    const double o = gamma3_oracle(sc.with_G(G));
    if (!(o > 0.0 && o <= 1.0) || o > prev + 1e-9) ok = false;
    prev = o;
    lowest = std::min(lowest, o);
  }
  const double at_zero = gamma3_oracle(sc.with_G(0.0));
  ok = ok && std::abs(at_zero - 1.0) <= 1e-9;

  // -log(oracle) = dm^2 G / (2 (b' + s' G))  <=>  dm^2 G / (-2 log oracle) = b' + s' G.
  const double dm2 = (sc.m_plus - sc.m_minus) * (sc.m_plus - sc.m_minus);
  std::vector<double> gs;
  std::vector<double> ls;
  for (int k = 0; k < 20; ++k) {
    const double G = 0.01 * std::pow(1000.0, k / 19.0);
    gs.push_back(G);
    ls.push_back(-std::log(gamma3_oracle(sc.with_G(G))));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < gs.size(); ++k) {
    const double y = dm2 * gs[k] / (2.0 * ls[k]);
    sx += gs[k];
    sy += y;
    sxx += gs[k] * gs[k];
    sxy += gs[k] * y;
  }
  const double n = static_cast<double>(gs.size());
  const double s_fit = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double b_fit = (sy - s_fit * sx) / n;
  double worst_rel = 0.0;
  for (std::size_t k = 0; k < gs.size(); ++k) {
    const double model = dm2 * gs[k] / (2.0 * (b_fit + s_fit * gs[k]));
    worst_rel = std::max(worst_rel, std::abs(model - ls[k]) / ls[k]);
  }
  ok = ok && b_fit > 0.0 && s_fit > 0.0 && worst_rel < 0.01;

  const auto half = sc.with_G(0.5);
  os << "oracle(0)=" << fmt(at_zero) << ", min over G<=10 " << fmt(lowest) << ", fit b'=" << fmt(b_fit)
     << " s'=" << fmt(s_fit) << " residual " << fmt(worst_rel)
     << ", oracle/closed_form at G=0.5: density " << fmt(gamma3_oracle(half) / gamma3_closed_form(half))
     << ", amplitude "
     << fmt(gamma3_oracle(half, VarianceConvention::Amplitude) / gamma3_closed_form(half));
  return {ok, os.str()};
}

Outcome check_inference(const ProtocolReport& r) {
  if (!r.gamma3_recovered || !r.G_recovered) {
    return {false, "inversion did not produce a value: " + r.inversion_note};
  }
  const double dg = std::abs(*r.gamma3_recovered - r.gamma3_effective);
  const double dG = std::abs(*r.G_recovered - r.G_configured) / r.G_configured;
  return {dg <= 1e-6 && dG <= 1e-4, "|gamma3 recovered - effective| " + fmt(dg) +
                                        ", G recovered " + fmt(*r.G_recovered) + " vs " +
                                        fmt(r.G_configured) + " (rel " + fmt(dG) + ")"};
}

Outcome check_decision(Profile profile, const ProtocolReport& on) {
  auto cfg = default_config();
  cfg.profile = profile;
  cfg.alice_switch = false;
  const auto off = run(cfg);
  const double gap = std::abs(on.expectation_with - off.expectation_with);

  // Branch states of particle 2 pushed far apart: gamma2 vanishes.
  auto far = default_config();
  far.profile = profile;
  far.schedule.g12 = 4.0;
  const auto far_on = run(far);
  far.alice_switch = false;
  const auto far_off = run(far);
  const double far_gap = std::abs(far_on.expectation_with - far_off.expectation_with);

  const bool ok = gap > 1e-3 && on.decision_detected && !off.decision_detected && far_gap < 1e-8 &&
                  !far_on.decision_detected;
  return {ok, "default |on - off| " + fmt(gap) + ", with gamma2 " + fmt(far_on.gamma2) +
                  ": |on - off| " + fmt(far_gap)};
}

Outcome check_nonlocality(Profile profile) {
  auto cfg = default_config();
  cfg.profile = profile;
  const auto scan = nonlocality_scan(cfg, {0.5, 1.0, 2.0});
  bool increasing = true;
  for (std::size_t k = 1; k < scan.rows.size(); ++k)
    increasing = increasing && scan.rows[k].gamma3 > scan.rows[k - 1].gamma3;
  const bool ok = scan.max_pairwise_tv < 1e-9 && scan.bob_spread > 1e-3 && increasing;
  std::ostringstream os;
  os << "max TV " << fmt(scan.max_pairwise_tv) << ", Bob spread " << fmt(scan.bob_spread)
     << ", gamma3";
  for (const auto& row : scan.rows) os << ' ' << fmt(row.gamma3);
  return {ok, os.str()};
}

Outcome check_norm_audit(const ProtocolReport& r) {
  const auto& n = r.norms;
  const double worst = std::max({n.phi_plus, n.phi_minus, n.chi_plus, n.chi_minus});
  const auto j = to_json(r);
  const bool emitted = j.contains("norm_audit") &&
                       j.at("norm_audit").contains("q1_integral_deviation") &&
                       j.at("norm_audit").contains("phi_plus");
  return {worst <= 1.0 + 1e-9 && n.young_bound_ok && emitted,
          "largest branch norm " + fmt(worst) + ", q1 deviation " +
              fmt(n.q1_integral_deviation[0]) + " / " + fmt(n.q1_integral_deviation[1])};
}

Outcome check_gating(Profile profile) {
  auto cfg = default_config();
  cfg.profile = profile;
  cfg.schedule.vr_active_during_vn23 = false;
  const auto v = validate(cfg);
  bool rejected = false;
  try {
    run(cfg);
  } catch (const Error& e) {
    rejected = e.code() == Errc::ValidationFailed;
  }
  cfg.alice_switch = false;
  const bool off_ok = validate(cfg).ok();
  return {v.has("vr_gating") && rejected && off_ok,
          std::string("diagnostic ") + (v.has("vr_gating") ? "vr_gating" : "missing") +
              ", switch-off variant " + (off_ok ? "accepted" : "rejected")};
}

}  // namespace

std::string format_check(const CheckResult& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS" : "FAIL") << "  AC" << r.id << " " << r.name << " [" << std::fixed
     << std::setprecision(2) << r.seconds << " s";
  if (r.budget_seconds > 0) os << " / " << r.budget_seconds << " s";
  os << "]  " << r.detail;
  return os.str();
}

std::vector<CheckResult> run_acceptance(Profile profile, std::ostream* log) {
  using clock = std::chrono::steady_clock;
  const auto suite_start = clock::now();
  std::vector<CheckResult> results;
  std::optional<ProtocolReport> default_report;

  auto default_run = [&]() -> const ProtocolReport& {
    if (!default_report) {
      auto cfg = default_config();
      cfg.profile = profile;
      default_report = run(cfg);
    }
    return *default_report;
  };

  auto check = [&](int id, const char* name, double budget, const std::function<Outcome()>& fn) {
    CheckResult r;
    r.id = id;
    r.name = name;
    r.budget_seconds = budget;
    const auto t0 = clock::now();
    try {
      const auto o = fn();
      r.pass = o.pass;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    if (budget > 0 && r.seconds > budget) {
      r.pass = false;
      r.detail += " (over time budget)";
    }
    if (log) *log << format_check(r) << std::endl;
    results.push_back(r);
  };

  check(1, "exact shear fidelity", 1.0, check_exact_shear);
  check(2, "formula/grid equivalence", 30.0, [&] { return check_formula_grid(profile); });
  check(3, "delta identities", 1.0, check_delta_identities);
  check(4, "gamma3 oracle audit", 10.0, check_gamma3_audit);
  check(5, "inference round trip", 30.0, [&] { return check_inference(default_run()); });
  check(6, "decision detection", 60.0, [&] { return check_decision(profile, default_run()); });
  check(7, "nonlocality scan", 120.0, [&] { return check_nonlocality(profile); });
  check(8, "norm audit", 0.0, [&] { return check_norm_audit(default_run()); });
  check(9, "gating rule and suite budget", 0.0, [&] {
    auto o = check_gating(profile);
    const double total = std::chrono::duration<double>(clock::now() - suite_start).count();
    o.detail += ", suite " + fmt(total) + " s / 120 s";
    o.pass = o.pass && total < 120.0;
    return o;
  });
  return results;
}

}  // namespace iit
