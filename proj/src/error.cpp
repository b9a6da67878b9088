#include "iit/error.hpp"

namespace iit {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::InvalidBounds: return "InvalidBounds";
    case Errc::LatticeMisaligned: return "LatticeMisaligned";
    case Errc::NonPositiveVariance: return "NonPositiveVariance";
    case Errc::GridTooNarrow: return "GridTooNarrow";
    case Errc::SupportOutsideGrid: return "SupportOutsideGrid";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::ZeroNorm: return "ZeroNorm";
    case Errc::NonFinite: return "NonFinite";
    case Errc::Arity: return "Arity";
    case Errc::NonOrthogonalPsi: return "NonOrthogonalPsi";
    case Errc::BadCoefficients: return "BadCoefficients";
    case Errc::IncommensurateShear: return "IncommensurateShear";
    case Errc::GridOverflow: return "GridOverflow";
    case Errc::BadAxis: return "BadAxis";
    case Errc::NonHermitian: return "NonHermitian";
    case Errc::NonOrthonormalBasis: return "NonOrthonormalBasis";
    case Errc::UnnormalizedWeight: return "UnnormalizedWeight";
    case Errc::IncommensurateShift: return "IncommensurateShift";
    case Errc::InvalidScenario: return "InvalidScenario";
    case Errc::DegenerateChannel: return "DegenerateChannel";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::ValidationFailed: return "ValidationFailed";
    case Errc::ConsistencyFailure: return "ConsistencyFailure";
    case Errc::ContractViolation: return "ContractViolation";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::InvalidConfig:
    case Errc::Io:
    case Errc::ContractViolation:
      return 1;
    case Errc::DegenerateChannel:
    case Errc::OutOfRange:
      return 3;
    default:
      return 2;
  }
}

}  // namespace iit
