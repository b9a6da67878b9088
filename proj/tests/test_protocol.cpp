#include <cmath>

#include "doctest.h"

#include "iit/protocol.hpp"

using namespace iit;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an iit::Error");
  return Errc::Io;
}

const ProtocolReport& default_report() {
  static const ProtocolReport r = run(default_config());
  return r;
}

}  // namespace

TEST_CASE("validate") {
  CHECK(validate(default_config()).ok());

  auto c = default_config();
  c.schedule.vr_active_during_vn23 = false;
  CHECK(validate(c).has("vr_gating"));
  c.alice_switch = false;
  CHECK(validate(c).ok());

  c = default_config();
  c.schedule.t2 = 0.5;  // t2 < t1
  CHECK(validate(c).has("time_order"));

  c = default_config();
  c.observable = {{{cplx{1}, cplx{0}}, {cplx{0}, cplx{1}}}};
  CHECK(validate(c).has("alpha_zero"));
  c.observable = {{{cplx{0}, cplx{0, 1}}, {cplx{0, 1}, cplx{0}}}};
  CHECK(validate(c).has("nonhermitian_observable"));

  c = default_config();
  c.prep.a = 1.0;
  c.schedule.g12 = -1;
  c.beta2 = 0;
  c.detection_threshold = 0;
  c.prep.psi_minus = {-2.0, 0.0};
  const auto v = validate(c);
  for (const char* code : {"bad_coefficients", "negative_coupling", "nonpositive_variance",
                           "bad_threshold", "support_overlap"})
    CHECK(v.has(code));
  CHECK(v.summary().find("support_overlap") != std::string::npos);

  c = default_config();
  c.grids = std::array<Grid, 3>{make_grid(-3, 3, 49), make_grid(-16, 16, 101),
                                make_grid(-30, 30, 241)};
  CHECK(validate(c).has("incommensurate_shear"));
  CHECK(code_of([&] { run(c); }) == Errc::ValidationFailed);
}

TEST_CASE("plan_grids yields commensurate padded grids") {
  for (double g12 : {0.5, 1.0, 3.0}) {
    for (double g23 : {0.25, 1.0, 2.0}) {
      auto c = default_config();
      c.schedule.g12 = g12;
      c.schedule.g23 = g23;
      const auto p = plan_grids(c);
      REQUIRE(p.grids.size() == 3);
      CHECK(p.r12 == commensurate_ratio(g12, p.grids[0].spacing(), p.grids[1].spacing(),
                                        Errc::IncommensurateShear));
      CHECK(p.r23 == commensurate_ratio(c.schedule.c23(), p.grids[1].spacing(),
                                        p.grids[2].spacing(), Errc::IncommensurateShear));
      CHECK(p.grids[0].min() < c.prep.psi_plus.lo);
      CHECK(p.grids[0].max() > c.prep.psi_minus.hi);
      CHECK_FALSE(p.derivation.empty());
    }
  }
  auto full = default_config();
  full.profile = Profile::Full;
  CHECK(plan_grids(full).grids[0].size() > plan_grids(default_config()).grids[0].size());
}

TEST_CASE("detect_decision") {
  CHECK(detect_decision(0.70, 0.75, 0.01));
  CHECK_FALSE(detect_decision(0.75, 0.75, 0.01));
  CHECK(code_of([] { detect_decision(0.7, 0.75, 0.0); }) == Errc::ContractViolation);
}

TEST_CASE("default run") {
  const auto& r = default_report();
  CHECK(r.decision_detected);
  CHECK(r.delta_measured > 1e-3);
  CHECK(std::abs(r.delta_measured - (r.expectation_without - r.expectation_with)) <= 1e-12);
  CHECK(std::abs(r.expectation_with - r.expectation_formula_with) < 1e-8);
  REQUIRE(r.gamma3_recovered);
  CHECK(std::abs(*r.gamma3_recovered - r.gamma3_effective) < 1e-6);
  REQUIRE(r.G_recovered);
  CHECK(std::abs(*r.G_recovered - r.G_configured) / r.G_configured < 1e-4);
  CHECK(r.gamma2 > 0.0);
  CHECK(r.gamma3_effective < 1.0);
  CHECK(r.norms.young_bound_ok);
  CHECK(std::abs(r.norms.q1_integral_deviation[0]) < 1e-12);
  CHECK(r.axis1_marginal_mismatch < 1e-10);
  CHECK(r.bipartite_exact_vs_effective_overlap > 0.0);
  CHECK(r.bipartite_exact_vs_effective_overlap <= 1.0);
  REQUIRE(r.expectation_exact_dynamics);
  // A unitary acting on particles 2 and 3 cannot move particle 1's statistics.
  CHECK(std::abs(*r.expectation_exact_dynamics - r.expectation_without) < 1e-10);
  CHECK(r.formula.mode == GammaMode::Normalized);
  CHECK(r.formula.expectation_with == doctest::Approx(r.expectation_formula_with));
}

TEST_CASE("switch off: Bob sees the no-interaction value") {
  auto c = default_config();
  c.alice_switch = false;
  const auto r = run(c);
  CHECK_FALSE(r.decision_detected);
  CHECK(std::abs(r.delta_measured) <= 1e-8);
  CHECK(std::abs(r.expectation_with - r.expectation_formula_without) < 1e-8);
  CHECK_FALSE(r.expectation_exact_dynamics);
  CHECK_FALSE(r.G_recovered);
  CHECK(r.gamma3_effective == doctest::Approx(default_report().gamma3_effective));
}

TEST_CASE("orthogonal particle-2 branches carry no signal") {
  auto c = default_config();
  c.schedule.g12 = 4.0;
  const auto on = run(c);
  c.alice_switch = false;
  const auto off = run(c);
  CHECK(std::abs(on.gamma2) < 1e-9);
  CHECK(std::abs(on.expectation_with - off.expectation_with) < 1e-8);
  CHECK(std::abs(on.delta_measured) < 1e-8);
  CHECK_FALSE(on.decision_detected);
}

TEST_CASE("raw gamma mode only changes the formula block") {
  auto c = default_config();
  c.gamma_mode = GammaMode::Raw;
  const auto r = run(c);
  const auto& n = default_report();
  CHECK(r.expectation_with == n.expectation_with);
  CHECK(r.formula.mode == GammaMode::Raw);
  CHECK(r.formula.gamma2 == doctest::Approx(r.gamma2_raw));
  CHECK(r.formula.gamma3 == doctest::Approx(r.gamma3_raw));
  CHECK(r.formula.delta != doctest::Approx(n.formula.delta));
}

TEST_CASE("amplitude variance convention runs end to end") {
  auto c = default_config();
  c.convention = VarianceConvention::Amplitude;
  const auto r = run(c);
  CHECK(std::abs(r.expectation_with - r.expectation_formula_with) < 1e-8);
  CHECK(r.decision_detected);
  // phi0 density variance halves: the particle-2 branches overlap less
  CHECK(r.gamma2 < default_report().gamma2);
}

TEST_CASE("level-1 detection is robust over g12 x g23") {
  for (double g12 : {0.5, 1.0, 2.0}) {
    for (double g23 : {0.5, 1.0, 2.0}) {
      auto c = default_config();
      c.schedule.g12 = g12;
      c.schedule.g23 = g23;
      const auto r = run(c);
      CAPTURE(g12);
      CAPTURE(g23);
      CHECK(std::abs(r.expectation_with - r.expectation_formula_with) < 1e-8);
      if (std::abs(r.gamma2) > 1e-3 && std::abs(1 - r.gamma3_effective) > 1e-3) CHECK(r.decision_detected);
    }
  }
}

TEST_CASE("nonlocality scan: Alice's marginal is blind to Carol") {
  const auto scan = nonlocality_scan(default_config(), {0.5, 1.0, 2.0, 4.0});
  REQUIRE(scan.rows.size() == 4);
  CHECK(scan.max_pairwise_tv < 1e-9);
  CHECK(scan.bob_spread > 1e-3);
  for (std::size_t k = 1; k < scan.rows.size(); ++k) {
    CHECK(scan.rows[k].gamma3 > scan.rows[k - 1].gamma3);
    CHECK(scan.rows[k].alice_marginal_tv < 1e-9);
  }
  CHECK(scan.rows[1].bob_expectation == doctest::Approx(default_report().expectation_with).epsilon(1e-10));

  auto off = default_config();
  off.alice_switch = false;
  CHECK(code_of([&] { nonlocality_scan(off, {1.0}); }) == Errc::ContractViolation);
  CHECK(code_of([&] { nonlocality_scan(default_config(), {}); }) == Errc::ContractViolation);
}

TEST_CASE("sweep") {
  const std::vector<double> values{0.5, 1.0, 1.5, 2.0, 3.0};
  const auto serial = sweep(default_config(), "g23", values, 1);
  const auto threaded = sweep(default_config(), "g23", values, 3);
  REQUIRE(serial.size() == values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    CHECK(serial[k].value == values[k]);
    CHECK(threaded[k].report.delta_measured == serial[k].report.delta_measured);
    CHECK(threaded[k].report.gamma3_oracle == serial[k].report.gamma3_oracle);
  }
  // stronger 2-3 coupling: smaller gamma3, larger delta
  for (std::size_t k = 1; k < values.size(); ++k) {
    CHECK(serial[k].report.gamma3_effective < serial[k - 1].report.gamma3_effective);
    CHECK(serial[k].report.delta_measured > serial[k - 1].report.delta_measured);
  }
  CHECK(serial[1].report.delta_measured == default_report().delta_measured);

  CHECK(code_of([] { sweep(default_config(), "mass", {1.0}); }) == Errc::InvalidConfig);
  CHECK(code_of([] { with_parameter(default_config(), "a-weight", 1.5); }) == Errc::InvalidConfig);
  for (const char* p : kSweepParameters) CHECK_NOTHROW(with_parameter(default_config(), p, 0.5));
  CHECK(with_parameter(default_config(), "T", 2.0).schedule.duration() == 2.0);
}

TEST_CASE("final_state") {
  const auto st = final_state(default_config());
  CHECK(st.rank() == 3);
  CHECK(st.norm_squared() == doctest::Approx(1.0).epsilon(1e-8));
}
