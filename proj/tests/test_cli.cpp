#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "cli.hpp"
#include "iit/serialize.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kConfigs{IIT_CONFIG_DIR};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = iit::cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "iit_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

const std::string kSweepHeader =
    "param,gamma2,gamma3_effective,gamma3_oracle,gamma3_closed_form,expectation_with,"
    "expectation_without,delta,decision";

}  // namespace

TEST_CASE("run: default config succeeds and writes report plus manifest") {
  const auto out = scratch("default_report.json");
  const auto r = call({"run", (kConfigs / "default.json").string(), "--out", out.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("decision detected") != std::string::npos);
  CHECK(r.out.find("grid plan:") != std::string::npos);
  std::ifstream in(out);
  const auto j = iit::json::parse(in);
  CHECK(j.at("decision_detected").get<bool>());
  auto man = out;
  man += ".manifest.json";
  std::ifstream min(man);
  const auto m = iit::manifest_from_json(iit::json::parse(min));
  CHECK(m.schema_version == 1);
  CHECK(m.command == "run");
}

TEST_CASE("run: error exits") {
  CHECK(call({"run", "missing.json"}).code == 1);
  const auto gated = call({"run", (kConfigs / "vr_off_switch_on.json").string(), "--out",
                           scratch("gated.json").string()});
  CHECK(gated.code == 2);
  CHECK(gated.err.find("vr_gating") != std::string::npos);

  const auto bad = scratch("bad_config.json");
  std::ofstream(bad) << R"({"beta2": "wide"})";
  CHECK(call({"run", bad.string(), "--out", scratch("x.json").string()}).code == 1);
  CHECK(call({"frobnicate"}).code == 1);
  CHECK(call({}).code == 1);
  CHECK(call({"--help"}).code == 0);
}

TEST_CASE("run: --dump-state writes the tripartite state") {
  auto cfg = iit::default_config();
  cfg.prep.phi0.variance = 4.0;  // coarser planned grids keep the dump small
  cfg.beta2 = 4.0;
  const auto cpath = scratch("small.json");
  std::ofstream(cpath) << iit::to_json(cfg).dump();
  const auto dump = scratch("state.json");
  const auto r = call({"run", cpath.string(), "--out", scratch("small_report.json").string(),
                       "--dump-state", dump.string()});
  REQUIRE(r.code == 0);
  std::ifstream in(dump);
  const auto st = iit::tensor_state_from_json(iit::json::parse(in));
  CHECK(st.rank() == 3);
  CHECK(st.norm_squared() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("sweep: golden header, one row per value, unknown parameter") {
  const auto out = scratch("sweep.csv");
  const auto r = call({"sweep", (kConfigs / "default.json").string(), "--param", "g23",
                       "--values", "0.5,1,1.5,2,3", "--out", out.string()});
  REQUIRE(r.code == 0);
  const auto lines = lines_of(out);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == kSweepHeader);
  CHECK(lines[2].rfind("1,", 0) == 0);
  CHECK(lines[2].substr(lines[2].size() - 3) == "yes");

  const auto single = scratch("single.csv");
  REQUIRE(call({"sweep", (kConfigs / "default.json").string(), "--param", "g23", "--values", "1",
                "--out", single.string()})
              .code == 0);
  CHECK(lines_of(single).at(1) == lines[2]);

  CHECK(call({"sweep", (kConfigs / "default.json").string(), "--param", "mass", "--values", "1",
              "--out", scratch("mass.csv").string()})
            .code == 1);
}

TEST_CASE("nonlocality command") {
  const auto out = scratch("scan.csv");
  const auto r = call({"nonlocality", (kConfigs / "default.json").string(), "--betas",
                       "0.5,1,2", "--out", out.string()});
  REQUIRE(r.code == 0);
  const auto lines = lines_of(out);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "beta2,gamma3,bob_expectation,alice_marginal_tv");
}

TEST_CASE("invert command") {
  const std::vector<std::string> base{"--a", "0.70710678", "--b", "0.70710678", "--alpha", "0.5"};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> args{"invert"};
    args.insert(args.end(), extra.begin(), extra.end());
    args.insert(args.end(), base.begin(), base.end());
    return call(args);
  };
  const auto r = with({"--delta", "0.05", "--gamma2", "0.5"});
  CHECK(r.code == 0);
  REQUIRE(r.out.rfind("gamma3 = ", 0) == 0);
  // eight-digit 1/sqrt(2) inputs leave a 1e-8 offset from the exact 0.8
  CHECK(std::stod(r.out.substr(9)) == doctest::Approx(0.8).epsilon(1e-7));
  CHECK(with({"--delta", "0", "--gamma2", "0.5"}).out.find("gamma3 = 1\n") != std::string::npos);
  CHECK(with({"--delta", "0.05", "--gamma2", "0"}).code == 3);

  const auto g = with({"--delta", "0.05", "--gamma2", "0.5", "--to-G", "--mode", "closed-form"});
  CHECK(g.code == 0);
  CHECK(g.out.find("G = ") != std::string::npos);
  CHECK(g.out.find("closed-form") != std::string::npos);
  // gamma3 = 0.12 lies below the closed form's floor exp(-2) for the default scenario
  CHECK(with({"--delta", "0.22", "--gamma2", "0.5", "--to-G", "--mode", "closed-form"}).code == 3);
  CHECK(with({"--delta", "0.05", "--gamma2", "0.5", "--to-G", "--mode", "nope"}).code == 1);
}

TEST_CASE("verify: unknown profile and IIT_PROFILE") {
  CHECK(call({"verify", "--profile", "huge"}).code == 1);
  ::setenv("IIT_PROFILE", "huge", 1);
  CHECK(call({"verify"}).code == 1);
  CHECK(call({"run", (kConfigs / "default.json").string(), "--out", scratch("p.json").string()}).code == 1);
  ::unsetenv("IIT_PROFILE");
}
