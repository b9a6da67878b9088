#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "iit/serialize.hpp"

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

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "iit_serialize_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("grid and wavefunction round trip") {
  const auto g = make_grid(-2, 2, 33);
  CHECK(grid_from_json(to_json(g)) == g);
  CHECK(grid_from_json(json{{"min", -2}, {"max", 2}, {"n", 33}}) == g);
  const auto f = superpose({0.3, 0.1}, gaussian_wf(make_grid(-8, 8, 65), 0, 1), {0, 0.2},
                           bump_wf(make_grid(-8, 8, 65), {1, 3}));
  const auto back = wavefunction_from_json(json::parse(to_json(f).dump()));
  REQUIRE(back.size() == f.size());
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(back[i] == f[i]);
}

TEST_CASE("tensor state round trip keeps axis-0-slowest order") {
  const std::array<Wavefunction, 3> f{gaussian_wf(make_grid(-6, 6, 13), 0, 1),
                                      gaussian_wf(make_grid(-8, 8, 17), 1, 1),
                                      bump_wf(make_grid(-1, 1, 5), {-0.9, 0.9})};
  const auto st = product(f);
  const auto j = to_json(st);
  CHECK(j.at("shape") == json::array({13, 17, 5}));
  CHECK(j.at("amplitudes").at(1).at(0).get<double>() == st.at(0, 0, 1).real());
  const auto back = tensor_state_from_json(json::parse(j.dump()));
  for (std::size_t k = 0; k < st.amplitudes().size(); ++k) CHECK(back.amplitudes()[k] == st.amplitudes()[k]);
}

TEST_CASE("effective pair serialization carries gamma and norms") {
  const auto g1 = make_grid(-4, 4, 33);
  const auto p = make_phi_pm(bump_wf(g1, {-2.5, -1.5}), bump_wf(g1, {1.5, 2.5}),
                             gaussian_wf(make_grid(-12, 12, 97), 0, 1), 1.0);
  const auto j = to_json(p);
  for (const char* k : {"plus", "minus", "gamma", "normalized_gamma", "norm_plus", "norm_minus"})
    CHECK(j.contains(k));
  CHECK(j.at("gamma").at(0).get<double>() == p.gamma.real());
}

TEST_CASE("config round trip is lossless") {
  auto c = default_config();
  c.prep.a = {0.6, 0.1};
  c.prep.b = {0.0, std::sqrt(1 - 0.37)};
  c.schedule.g12 = 0.1 + 0.2;  // not exactly representable in decimal shortest form
  c.observable[0][1] = {0.25, -0.125};
  c.observable[1][0] = {0.25, 0.125};
  c.profile = Profile::Full;
  c.convention = VarianceConvention::Amplitude;
  c.gamma_mode = GammaMode::Raw;
  c.grids = std::array<Grid, 3>{make_grid(-3, 3, 49), make_grid(-16, 16, 257), make_grid(-30, 30, 481)};
  const auto text = to_json(c).dump();
  const auto back = config_from_json(json::parse(text));
  CHECK(to_json(back).dump() == text);
  CHECK(back.schedule.g12 == c.schedule.g12);
  CHECK(back.prep.b == c.prep.b);
}

TEST_CASE("config parsing rejects malformed input") {
  CHECK(code_of([] { config_from_json(json{{"bogus", 1}}); }) == Errc::InvalidConfig);
  CHECK(code_of([] { config_from_json(json{{"beta2", "one"}}); }) == Errc::InvalidConfig);
  CHECK(code_of([] { config_from_json(json{{"schema_version", 2}}); }) == Errc::InvalidConfig);
  CHECK(code_of([] { config_from_json(json{{"profile", "huge"}}); }) == Errc::InvalidConfig);
  CHECK(code_of([] { config_from_json(json{{"preparation", {{"a", {1, 2, 3}}}}}); }) == Errc::InvalidConfig);
  CHECK(code_of([] { config_from_json(json{{"grids", {{{"min", 0.05}, {"max", 1.05}, {"n", 11}}}}}); }) ==
        Errc::InvalidConfig);
  CHECK(code_of([] { load_config("/nonexistent/iit.json"); }) == Errc::Io);

  const auto bad = scratch("bad.json");
  std::ofstream(bad) << "{ not json";
  CHECK(code_of([&] { load_config(bad); }) == Errc::InvalidConfig);

  // partial configs inherit defaults
  const auto c = config_from_json(json{{"beta2", 2.0}});
  CHECK(c.beta2 == 2.0);
  CHECK(c.schedule.g12 == default_config().schedule.g12);
}

TEST_CASE("manifest round trip") {
  RunManifest m;
  m.config = default_config();
  m.config.beta2 = 0.7;
  m.command = "run";
  m.arguments = {"run", "configs/default.json"};
  m.started_utc = "2026-01-01T00:00:00Z";
  m.finished_utc = "2026-01-01T00:00:01Z";
  m.profile = "compact";
  m.seed = 42;
  const auto text = to_json(m).dump();
  CHECK(to_json(manifest_from_json(json::parse(text))).dump() == text);
}

TEST_CASE("reports are deterministic and complete") {
  const auto a = to_json(run(default_config())).dump();
  const auto b = to_json(run(default_config())).dump();
  CHECK(a == b);
  const auto j = json::parse(a);
  for (const char* k : {"expectation_with", "expectation_without", "delta_measured", "gamma2",
                        "gamma3_effective", "gamma3_oracle", "gamma3_closed_form",
                        "gamma3_recovered", "decision_detected", "G_recovered", "norm_audit",
                        "bipartite_exact_vs_effective_overlap", "grid_plan"})
    CHECK(j.contains(k));
}

TEST_CASE("csv headers are pinned") {
  CHECK(std::string(kSweepCsvHeader) ==
        "param,gamma2,gamma3_effective,gamma3_oracle,gamma3_closed_form,expectation_with,"
        "expectation_without,delta,decision");
  CHECK(std::string(kScanCsvHeader) == "beta2,gamma3,bob_expectation,alice_marginal_tv");
  const auto csv = sweep_csv({});
  CHECK(csv == std::string(kSweepCsvHeader) + "\n");
}

TEST_CASE("atomic write replaces the target and leaves no temporary") {
  const auto p = scratch("atomic.txt");
  write_file_atomic(p, "first\n");
  write_file_atomic(p, "second\n");
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  CHECK(line == "second");
  for (const auto& e : std::filesystem::directory_iterator(p.parent_path()))
    CHECK(e.path().filename().string().find(".tmp.") == std::string::npos);
  CHECK(code_of([] { write_file_atomic("/nonexistent/dir/x.txt", "x"); }) == Errc::Io);
}
