#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "iit/effective.hpp"
#include "iit/grid.hpp"
#include "iit/protocol.hpp"
#include "iit/tensor_state.hpp"

namespace iit {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

json to_json(const Grid& g);
/// Accepts {origin, n, spacing} or {min, max, n}.
Grid grid_from_json(const json& j);

/// {"grid": {...}, "amplitudes": [[re, im], ...]}
json to_json(const Wavefunction& f);
Wavefunction wavefunction_from_json(const json& j);

/// {"grids": [...], "shape": [...], "amplitudes": [[re, im], ...]}, axis 0 slowest.
json to_json(const TensorState& s);
TensorState tensor_state_from_json(const json& j);

json to_json(const EffectivePair& p);

json to_json(const ProtocolConfig& c);
/// Missing keys keep their defaults; unknown keys and type errors throw InvalidConfig.
ProtocolConfig config_from_json(const json& j);
ProtocolConfig load_config(const std::filesystem::path& path);

json to_json(const ProtocolReport& r);
json to_json(const ScanReport& r);

struct RunManifest {
  int schema_version = kSchemaVersion;
  ProtocolConfig config;
  std::string command;
  std::vector<std::string> arguments;
  std::string started_utc;
  std::string finished_utc;
  std::string profile;
  std::uint64_t seed = 0;
};

json to_json(const RunManifest& m);
RunManifest manifest_from_json(const json& j);

inline constexpr const char* kSweepCsvHeader =
    "param,gamma2,gamma3_effective,gamma3_oracle,gamma3_closed_form,expectation_with,"
    "expectation_without,delta,decision";
inline constexpr const char* kScanCsvHeader = "beta2,gamma3,bob_expectation,alice_marginal_tv";

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string scan_csv(const ScanReport& scan);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string_view profile_name(Profile p);
Profile parse_profile(std::string_view name);  // throws InvalidConfig

}  // namespace iit
