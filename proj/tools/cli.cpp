#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "iit/acceptance.hpp"
#include "iit/analytics.hpp"
#include "iit/serialize.hpp"

namespace iit::cli {

namespace {

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Precedence: explicit flag, then IIT_PROFILE, then whatever the config says.
std::optional<Profile> profile_override(const std::string& flag) {
  if (!flag.empty()) return parse_profile(flag);
  if (const char* env = std::getenv("IIT_PROFILE"); env && *env) return parse_profile(env);
  return std::nullopt;
}

std::filesystem::path manifest_path(const std::filesystem::path& out) {
  auto p = out;
  p += ".manifest.json";
  return p;
}

void write_manifest(const std::filesystem::path& out, const ProtocolConfig& cfg,
                    const std::string& command, const std::vector<std::string>& args,
                    const std::string& started) {
  RunManifest m;
  m.config = cfg;
  m.command = command;
  m.arguments = args;
  m.started_utc = started;
  m.finished_utc = utc_now();
  m.profile = std::string(profile_name(cfg.profile));
  write_file_atomic(manifest_path(out), to_json(m).dump(2) + "\n");
}

void print_summary(std::ostream& out, const ProtocolReport& r) {
  auto row = [&](const char* k, const std::string& v) {
    out << "  " << std::left << std::setw(34) << k << v << '\n';
  };
  auto num = [](double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
  };
  auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string("-"); };
  const auto& g = r.plan.grids;
  out << "grid plan: " << r.plan.derivation << '\n';
  row("grid sizes", std::to_string(g[0].size()) + " x " + std::to_string(g[1].size()) + " x " +
                        std::to_string(g[2].size()));
  row("alice switch", r.alice_switch ? "on" : "off");
  row("gamma2 (normalized / raw)", num(r.gamma2) + " / " + num(r.gamma2_raw));
  row("gamma3 effective (norm. / raw)", num(r.gamma3_effective) + " / " + num(r.gamma3_raw));
  row("gamma3 oracle / closed form", num(r.gamma3_oracle) + " / " + num(r.gamma3_closed_form) +
                                         (r.closed_form_exceeds_one ? "  (closed form > 1)" : ""));
  row("<A> measured", num(r.expectation_with));
  row("<A> without interaction", num(r.expectation_without));
  row("delta", num(r.delta_measured));
  row("decision detected", r.decision_detected ? "yes" : "no");
  row("<A> exact dynamics", opt(r.expectation_exact_dynamics));
  row("overlap exact/effective (2, 3)", num(r.bipartite_exact_vs_effective_overlap) + ", " +
                                            opt(r.tripartite_exact_vs_effective_overlap));
  row("gamma3 recovered", opt(r.gamma3_recovered));
  row("G configured / recovered", num(r.G_configured) + " / " + opt(r.G_recovered));
  if (!r.inversion_note.empty()) row("inversion note", r.inversion_note);
  row("norms phi+ phi- chi+ chi-", num(r.norms.phi_plus) + " " + num(r.norms.phi_minus) + " " +
                                       num(r.norms.chi_plus) + " " + num(r.norms.chi_minus));
  row("q1 integral deviation", num(r.norms.q1_integral_deviation[0]) + " " +
                                   num(r.norms.q1_integral_deviation[1]));
  row("young bound", r.norms.young_bound_ok ? "ok" : "VIOLATED");
}

int cmd_run(const std::string& config_path, const std::string& out_path, const std::string& dump,
            const std::string& profile_flag, const std::vector<std::string>& args,
            std::ostream& out) {
  const auto started = utc_now();
  auto cfg = load_config(config_path);
  if (auto p = profile_override(profile_flag)) cfg.profile = *p;
  const auto report = run(cfg);
  write_file_atomic(out_path, to_json(report).dump(2) + "\n");
  write_manifest(out_path, cfg, "run", args, started);
  if (!dump.empty()) write_file_atomic(dump, to_json(final_state(cfg)).dump() + "\n");
  print_summary(out, report);
  out << "report written to " << out_path << '\n';
  return report.inversion_out_of_range ? 3 : 0;
}

int cmd_sweep(const std::string& config_path, const std::string& param,
              const std::vector<double>& values, const std::string& out_path, unsigned workers,
              const std::string& profile_flag, const std::vector<std::string>& args,
              std::ostream& out) {
  const auto started = utc_now();
  auto cfg = load_config(config_path);
  if (auto p = profile_override(profile_flag)) cfg.profile = *p;
  if (values.empty()) throw Error(Errc::InvalidConfig, "--values needs at least one value");
  with_parameter(cfg, param, values.front());  // rejects unknown names before any work
  const auto rows = sweep(cfg, param, values, workers);
  const auto csv = sweep_csv(rows);
  write_file_atomic(out_path, csv);
  write_manifest(out_path, cfg, "sweep", args, started);
  out << csv;
  return 0;
}

int cmd_nonlocality(const std::string& config_path, const std::vector<double>& betas,
                    const std::string& out_path, const std::string& profile_flag,
                    const std::vector<std::string>& args, std::ostream& out) {
  const auto started = utc_now();
  auto cfg = load_config(config_path);
  if (auto p = profile_override(profile_flag)) cfg.profile = *p;
  const auto scan = nonlocality_scan(cfg, betas);
  const auto csv = scan_csv(scan);
  write_file_atomic(out_path, csv);
  write_manifest(out_path, cfg, "nonlocality", args, started);
  out << csv << "max pairwise TV " << scan.max_pairwise_tv << ", Bob spread " << scan.bob_spread
      << '\n';
  return 0;
}

struct InvertArgs {
  double delta = 0.0;
  double a = 0.0;
  double b = 0.0;
  double gamma2 = 0.0;
  double alpha = 0.0;
  bool to_G = false;
  std::string mode = "oracle";
  std::string convention = "density";
  GaussianScenario scenario;
};

int cmd_invert(const InvertArgs& in, std::ostream& out) {
  const double g3 = invert_delta_to_gamma3(in.delta, in.a, in.b, in.gamma2, in.alpha);
  out << std::setprecision(12) << "gamma3 = " << g3 << '\n';
  if (in.to_G) {
    const auto mode = in.mode == "closed-form" ? InversionMode::ClosedForm : InversionMode::Oracle;
    const auto conv = in.convention == "amplitude" ? VarianceConvention::Amplitude
                                                   : VarianceConvention::Density;
    const double G = invert_gamma3_to_G(g3, in.scenario, mode, conv);
    out << "G = " << G << " (mode " << in.mode << ", " << in.convention << " convention)\n";
  }
  return 0;
}

int cmd_verify(const std::string& profile_flag, std::ostream& out) {
  const auto profile = profile_override(profile_flag).value_or(Profile::Compact);
  out << "acceptance suite, profile " << profile_name(profile) << '\n';
  const auto results = run_acceptance(profile, &out);
  const auto passed = std::count_if(results.begin(), results.end(),
                                    [](const CheckResult& r) { return r.pass; });
  out << passed << "/" << results.size() << " checks passed\n";
  return passed == static_cast<long>(results.size()) ? 0 : 2;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tripartite information-transfer protocol simulator", "iit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string dump_path;
  std::string profile_flag;
  std::string param;
  std::vector<double> values;
  std::vector<double> betas{0.5, 1.0, 2.0};
  unsigned workers = 0;
  InvertArgs inv;

  auto* run_cmd = app.add_subcommand("run", "run one configuration and write a JSON report");
  run_cmd->add_option("config", config_path, "config JSON")->required();
  out_path = "iit_report.json";
  run_cmd->add_option("--out", out_path, "report path")->capture_default_str();
  run_cmd->add_option("--dump-state", dump_path, "also write the final tripartite state as JSON");
  run_cmd->add_option("--profile", profile_flag, "compact or full");

  auto* sweep_cmd = app.add_subcommand("sweep", "vary one parameter and emit CSV");
  sweep_cmd->add_option("config", config_path, "config JSON")->required();
  sweep_cmd->add_option("--param", param, "g12, g23, T, beta2, sigma2 or a-weight")->required();
  sweep_cmd->add_option("--values", values, "comma separated values")->required()->delimiter(',');
  sweep_cmd->add_option("--out", out_path, "CSV path")->required();
  sweep_cmd->add_option("--workers", workers, "worker threads (0 = hardware)");
  sweep_cmd->add_option("--profile", profile_flag, "compact or full");

  auto* inv_cmd = app.add_subcommand("invert", "recover gamma3 (and G) from a measured delta");
  inv_cmd->add_option("--delta", inv.delta)->required();
  inv_cmd->add_option("--a", inv.a)->required();
  inv_cmd->add_option("--b", inv.b)->required();
  inv_cmd->add_option("--gamma2", inv.gamma2)->required();
  inv_cmd->add_option("--alpha", inv.alpha)->required();
  inv_cmd->add_flag("--to-G", inv.to_G, "also invert gamma3 for G");
  inv_cmd->add_option("--mode", inv.mode)->check(CLI::IsMember({"oracle", "closed-form"}))
      ->capture_default_str();
  inv_cmd->add_option("--convention", inv.convention)
      ->check(CLI::IsMember({"density", "amplitude"}))
      ->capture_default_str();
  inv_cmd->add_option("--m-plus", inv.scenario.m_plus)->capture_default_str();
  inv_cmd->add_option("--m-minus", inv.scenario.m_minus)->capture_default_str();
  inv_cmd->add_option("--sigma2", inv.scenario.sigma2)->capture_default_str();
  inv_cmd->add_option("--beta2", inv.scenario.beta2)->capture_default_str();
  inv_cmd->add_option("--T", inv.scenario.duration, "interaction duration")->capture_default_str();

  auto* verify_cmd = app.add_subcommand("verify", "run the acceptance suite");
  verify_cmd->add_option("--profile", profile_flag, "compact or full");

  auto* nl_cmd = app.add_subcommand("nonlocality", "vary Carol's beta^2 and emit CSV");
  nl_cmd->add_option("config", config_path, "config JSON")->required();
  nl_cmd->add_option("--betas", betas, "comma separated beta^2 values")
      ->delimiter(',')
      ->capture_default_str();
  nl_cmd->add_option("--out", out_path, "CSV path")->required();
  nl_cmd->add_option("--profile", profile_flag, "compact or full");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) return cmd_run(config_path, out_path, dump_path, profile_flag, args, out);
    if (*sweep_cmd) {
      return cmd_sweep(config_path, param, values, out_path, workers, profile_flag, args, out);
    }
    if (*inv_cmd) return cmd_invert(inv, out);
    if (*verify_cmd) return cmd_verify(profile_flag, out);
    if (*nl_cmd) return cmd_nonlocality(config_path, betas, out_path, profile_flag, args, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace iit::cli
