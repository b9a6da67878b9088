#include "iit/serialize.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <system_error>

#include <unistd.h>

namespace iit {

namespace {

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) {
    throw Error(Errc::InvalidConfig, "complex value must be [re, im]");
  }
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

json amplitudes_json(std::span<const cplx> amps) {
  json out = json::array();
  for (const auto& a : amps) out.push_back(complex_json(a));
  return out;
}

std::vector<cplx> amplitudes_from(const json& j) {
  std::vector<cplx> out;
  out.reserve(j.size());
  for (const auto& a : j) out.push_back(complex_from(a));
  return out;
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  if (!j.is_object()) throw Error(Errc::InvalidConfig, std::string(where) + " must be an object");
  const std::set<std::string> keys(known.begin(), known.end());
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) {
      throw Error(Errc::InvalidConfig, "unknown key '" + k + "' in " + where);
    }
  }
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_opt_complex(const json& j, const char* key, cplx& out) {
  if (j.contains(key)) out = complex_from(j.at(key));
}

json support_json(const SupportSpec& s) { return {{"lo", s.lo}, {"hi", s.hi}}; }

SupportSpec support_from(const json& j, SupportSpec s) {
  reject_unknown(j, {"lo", "hi"}, "support");
  read_opt(j, "lo", s.lo);
  read_opt(j, "hi", s.hi);
  return s;
}

std::string_view convention_name(VarianceConvention c) {
  return c == VarianceConvention::Density ? "density" : "amplitude";
}

std::string_view gamma_mode_name(GammaMode m) {
  return m == GammaMode::Normalized ? "normalized" : "raw";
}

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string_view profile_name(Profile p) { return p == Profile::Compact ? "compact" : "full"; }

Profile parse_profile(std::string_view name) {
  if (name == "compact") return Profile::Compact;
  if (name == "full") return Profile::Full;
  throw Error(Errc::InvalidConfig, "unknown profile '" + std::string(name) + "'");
}

json to_json(const Grid& g) {
  return {{"origin", g.origin()}, {"n", g.size()}, {"spacing", g.spacing()}};
}

Grid grid_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::InvalidConfig, "grid must be an object");
  if (j.contains("spacing")) {
    reject_unknown(j, {"origin", "n", "spacing"}, "grid");
    return Grid::from_lattice(j.at("origin").get<std::int64_t>(), j.at("n").get<std::size_t>(),
                              j.at("spacing").get<double>());
  }
  reject_unknown(j, {"min", "max", "n"}, "grid");
  return make_grid(j.at("min").get<double>(), j.at("max").get<double>(),
                   j.at("n").get<std::size_t>());
}

json to_json(const Wavefunction& f) {
  return {{"grid", to_json(f.grid())}, {"amplitudes", amplitudes_json(f.amplitudes())}};
}

Wavefunction wavefunction_from_json(const json& j) {
  return Wavefunction(grid_from_json(j.at("grid")), amplitudes_from(j.at("amplitudes")));
}

json to_json(const TensorState& s) {
  json grids = json::array();
  json shape = json::array();
  for (const auto& g : s.grids()) {
    grids.push_back(to_json(g));
    shape.push_back(g.size());
  }
  return {{"grids", grids},
          {"shape", shape},
          {"order", "axis0-slowest"},
          {"amplitudes", amplitudes_json(s.amplitudes())}};
}

TensorState tensor_state_from_json(const json& j) {
  std::vector<Grid> grids;
  for (const auto& g : j.at("grids")) grids.push_back(grid_from_json(g));
  auto amps = amplitudes_from(j.at("amplitudes"));
  std::size_t expected = 1;
  for (const auto& g : grids) expected *= g.size();
  if (amps.size() != expected) {
    throw Error(Errc::GridMismatch, "tensor amplitude count does not match grids");
  }
  return TensorState(std::move(grids), std::move(amps));
}

json to_json(const EffectivePair& p) {
  return {{"plus", to_json(p.plus)},
          {"minus", to_json(p.minus)},
          {"gamma", complex_json(p.gamma)},
          {"normalized_gamma", complex_json(p.normalized_gamma())},
          {"norm_plus", p.norm_plus},
          {"norm_minus", p.norm_minus},
          {"spectator_mass", p.spectator_mass}};
}

json to_json(const ProtocolConfig& c) {
  const auto& p = c.prep;
  const auto& s = c.schedule;
  json obs = json::array();
  for (const auto& row : c.observable) obs.push_back({complex_json(row[0]), complex_json(row[1])});
  json out = {
      {"schema_version", kSchemaVersion},
      {"preparation",
       {{"a", complex_json(p.a)},
        {"b", complex_json(p.b)},
        {"psi_plus", support_json(p.psi_plus)},
        {"psi_minus", support_json(p.psi_minus)},
        {"phi0", {{"mean", p.phi0.mean}, {"variance", p.phi0.variance}}}}},
      {"schedule",
       {{"g12", s.g12},
        {"t0", s.t0},
        {"t1", s.t1},
        {"t2", s.t2},
        {"t3", s.t3},
        {"t4", s.t4},
        {"g23", s.g23},
        {"vr_active_during_vn23", s.vr_active_during_vn23}}},
      {"alice_switch", c.alice_switch},
      {"beta2", c.beta2},
      {"observable", obs},
      {"profile", profile_name(c.profile)},
      {"variance_convention", convention_name(c.convention)},
      {"gamma_mode", gamma_mode_name(c.gamma_mode)},
      {"detection_threshold", c.detection_threshold},
  };
  if (c.grids) {
    json g = json::array();
    for (const auto& grid : *c.grids) g.push_back(to_json(grid));
    out["grids"] = g;
  }
  return out;
}

ProtocolConfig config_from_json(const json& j) {
  try {
    reject_unknown(j,
                   {"schema_version", "preparation", "schedule", "alice_switch", "beta2",
                    "observable", "profile", "variance_convention", "gamma_mode",
                    "detection_threshold", "grids", "description"},
                   "config");
    if (j.contains("schema_version") && j.at("schema_version").get<int>() != kSchemaVersion) {
      throw Error(Errc::InvalidConfig, "unsupported schema_version");
    }
    ProtocolConfig c = default_config();
    if (j.contains("preparation")) {
      const auto& p = j.at("preparation");
      reject_unknown(p, {"a", "b", "psi_plus", "psi_minus", "phi0"}, "preparation");
      read_opt_complex(p, "a", c.prep.a);
      read_opt_complex(p, "b", c.prep.b);
      if (p.contains("psi_plus")) c.prep.psi_plus = support_from(p.at("psi_plus"), c.prep.psi_plus);
      if (p.contains("psi_minus")) {
        c.prep.psi_minus = support_from(p.at("psi_minus"), c.prep.psi_minus);
      }
      if (p.contains("phi0")) {
        const auto& g = p.at("phi0");
        reject_unknown(g, {"mean", "variance"}, "phi0");
        read_opt(g, "mean", c.prep.phi0.mean);
        read_opt(g, "variance", c.prep.phi0.variance);
      }
    }
    if (j.contains("schedule")) {
      const auto& s = j.at("schedule");
      reject_unknown(s, {"g12", "t0", "t1", "t2", "t3", "t4", "g23", "vr_active_during_vn23"},
                     "schedule");
      read_opt(s, "g12", c.schedule.g12);
      read_opt(s, "t0", c.schedule.t0);
      read_opt(s, "t1", c.schedule.t1);
      read_opt(s, "t2", c.schedule.t2);
      read_opt(s, "t3", c.schedule.t3);
      read_opt(s, "t4", c.schedule.t4);
      read_opt(s, "g23", c.schedule.g23);
      read_opt(s, "vr_active_during_vn23", c.schedule.vr_active_during_vn23);
    }
    read_opt(j, "alice_switch", c.alice_switch);
    read_opt(j, "beta2", c.beta2);
    read_opt(j, "detection_threshold", c.detection_threshold);
    if (j.contains("observable")) {
      const auto& m = j.at("observable");
      if (!m.is_array() || m.size() != 2 || m.at(0).size() != 2 || m.at(1).size() != 2) {
        throw Error(Errc::InvalidConfig, "observable must be a 2x2 matrix");
      }
      for (int r = 0; r < 2; ++r)
        for (int k = 0; k < 2; ++k) c.observable[r][k] = complex_from(m.at(r).at(k));
    }
    if (j.contains("profile")) c.profile = parse_profile(j.at("profile").get<std::string>());
    if (j.contains("variance_convention")) {
      const auto v = j.at("variance_convention").get<std::string>();
      if (v == "density") {
        c.convention = VarianceConvention::Density;
      } else if (v == "amplitude") {
        c.convention = VarianceConvention::Amplitude;
      } else {
        throw Error(Errc::InvalidConfig, "variance_convention must be density or amplitude");
      }
    }
    if (j.contains("gamma_mode")) {
      const auto v = j.at("gamma_mode").get<std::string>();
      if (v == "normalized") {
        c.gamma_mode = GammaMode::Normalized;
      } else if (v == "raw") {
        c.gamma_mode = GammaMode::Raw;
      } else {
        throw Error(Errc::InvalidConfig, "gamma_mode must be normalized or raw");
      }
    }
    if (j.contains("grids") && !j.at("grids").is_null()) {
      const auto& g = j.at("grids");
      if (!g.is_array() || g.size() != 3) throw Error(Errc::InvalidConfig, "grids needs 3 entries");
      c.grids = std::array<Grid, 3>{grid_from_json(g.at(0)), grid_from_json(g.at(1)),
                                    grid_from_json(g.at(2))};
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidConfig) throw;
    throw Error(Errc::InvalidConfig, e.what());
  }
}

ProtocolConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

json to_json(const ProtocolReport& r) {
  const auto& sc = r.scenario;
  json grids = json::array();
  for (const auto& g : r.plan.grids) grids.push_back(to_json(g));
  return {
      {"schema_version", kSchemaVersion},
      {"alice_switch", r.alice_switch},
      {"grid_plan",
       {{"grids", grids}, {"r12", r.plan.r12}, {"r23", r.plan.r23}, {"derivation", r.plan.derivation}}},
      {"gamma2", r.gamma2},
      {"gamma2_raw", r.gamma2_raw},
      {"gamma3_effective", r.gamma3_effective},
      {"gamma3_raw", r.gamma3_raw},
      {"gamma3_oracle", r.gamma3_oracle},
      {"gamma3_closed_form", r.gamma3_closed_form},
      {"closed_form_exceeds_one", r.closed_form_exceeds_one},
      {"oracle_over_closed_form", r.oracle_over_closed_form},
      {"scenario",
       {{"m_plus", sc.m_plus},
        {"m_minus", sc.m_minus},
        {"sigma2", sc.sigma2},
        {"beta2", sc.beta2},
        {"g23", sc.g23},
        {"duration", sc.duration},
        {"G", sc.G()},
        {"K", sc.K()},
        {"M", sc.M()}}},
      {"alpha", r.alpha},
      {"a_pp", r.a_pp},
      {"a_mm", r.a_mm},
      {"expectation_with", r.expectation_with},
      {"expectation_without", r.expectation_without},
      {"expectation_formula_with", r.expectation_formula_with},
      {"expectation_formula_without", r.expectation_formula_without},
      {"delta_measured", r.delta_measured},
      {"decision_detected", r.decision_detected},
      {"expectation_exact_dynamics", optional_json(r.expectation_exact_dynamics)},
      {"tripartite_exact_vs_effective_overlap",
       optional_json(r.tripartite_exact_vs_effective_overlap)},
      {"bipartite_exact_vs_effective_overlap", r.bipartite_exact_vs_effective_overlap},
      {"axis1_marginal_mismatch", r.axis1_marginal_mismatch},
      {"gamma3_recovered", optional_json(r.gamma3_recovered)},
      {"G_configured", r.G_configured},
      {"G_recovered", optional_json(r.G_recovered)},
      {"inversion_out_of_range", r.inversion_out_of_range},
      {"inversion_note", r.inversion_note},
      {"formula",
       {{"gamma_mode", gamma_mode_name(r.formula.mode)},
        {"gamma2", r.formula.gamma2},
        {"gamma3", r.formula.gamma3},
        {"expectation_with", r.formula.expectation_with},
        {"expectation_without", r.formula.expectation_without},
        {"delta", r.formula.delta}}},
      {"norm_audit",
       {{"phi_plus", r.norms.phi_plus},
        {"phi_minus", r.norms.phi_minus},
        {"chi_plus", r.norms.chi_plus},
        {"chi_minus", r.norms.chi_minus},
        {"q1_integral_deviation", r.norms.q1_integral_deviation},
        {"young_bound_ok", r.norms.young_bound_ok}}},
  };
}

json to_json(const ScanReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"beta2", row.beta2},
                    {"gamma3", row.gamma3},
                    {"bob_expectation", row.bob_expectation},
                    {"alice_marginal_tv", row.alice_marginal_tv}});
  }
  return {{"schema_version", kSchemaVersion},
          {"rows", rows},
          {"max_pairwise_tv", r.max_pairwise_tv},
          {"bob_spread", r.bob_spread}};
}

json to_json(const RunManifest& m) {
  return {{"schema_version", m.schema_version},
          {"config", to_json(m.config)},
          {"command", m.command},
          {"arguments", m.arguments},
          {"started_utc", m.started_utc},
          {"finished_utc", m.finished_utc},
          {"profile", m.profile},
          {"seed", m.seed}};
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  try {
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != kSchemaVersion) {
      throw Error(Errc::InvalidConfig, "unsupported manifest schema_version");
    }
    m.config = config_from_json(j.at("config"));
    m.command = j.at("command").get<std::string>();
    m.arguments = j.at("arguments").get<std::vector<std::string>>();
    m.started_utc = j.at("started_utc").get<std::string>();
    m.finished_utc = j.at("finished_utc").get<std::string>();
    m.profile = j.at("profile").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, e.what());
  }
  return m;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << kSweepCsvHeader << '\n';
  for (const auto& row : rows) {
    const auto& r = row.report;
    os << csv_number(row.value) << ',' << csv_number(r.gamma2) << ','
       << csv_number(r.gamma3_effective) << ',' << csv_number(r.gamma3_oracle) << ','
       << csv_number(r.gamma3_closed_form) << ',' << csv_number(r.expectation_with) << ','
       << csv_number(r.expectation_without) << ',' << csv_number(r.delta_measured) << ','
       << (r.decision_detected ? "yes" : "no") << '\n';
  }
  return os.str();
}

std::string scan_csv(const ScanReport& scan) {
  std::ostringstream os;
  os << kScanCsvHeader << '\n';
  for (const auto& row : scan.rows) {
    os << csv_number(row.beta2) << ',' << csv_number(row.gamma3) << ','
       << csv_number(row.bob_expectation) << ',' << csv_number(row.alice_marginal_tv) << '\n';
  }
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error(Errc::Io, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(Errc::Io, "cannot move " + tmp.string() + " to " + path.string() + ": " +
                              ec.message());
  }
}

}  // namespace iit
