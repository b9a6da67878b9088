#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace iit {

enum class Errc {
  // grid_core
  InvalidBounds,
  LatticeMisaligned,
  NonPositiveVariance,
  GridTooNarrow,
  SupportOutsideGrid,
  GridMismatch,
  ZeroNorm,
  NonFinite,
  // tensor_state
  Arity,
  NonOrthogonalPsi,
  BadCoefficients,
  IncommensurateShear,
  GridOverflow,
  BadAxis,
  NonHermitian,
  NonOrthonormalBasis,
  // effective
  UnnormalizedWeight,
  IncommensurateShift,
  // analytics
  InvalidScenario,
  DegenerateChannel,
  OutOfRange,
  NoConvergence,
  // protocol / cli
  ValidationFailed,
  ConsistencyFailure,
  ContractViolation,
  InvalidConfig,
  Io,
};

std::string_view errc_name(Errc code);

/// Exit-code class used by the CLI: 1 usage/config, 2 numerical/validation, 3 inversion range.
int exit_code_for(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace iit
