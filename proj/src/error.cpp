#include "specgauss/error.hpp"

namespace specgauss {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::BadParameter: return "BadParameter";
    case Errc::NonFiniteEvaluation: return "NonFiniteEvaluation";
    case Errc::QuadratureNonConvergence: return "QuadratureNonConvergence";
    case Errc::SingularityTooStrong: return "SingularityTooStrong";
    case Errc::OracleNonConvergence: return "OracleNonConvergence";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::DeltaOutOfRange: return "DeltaOutOfRange";
    case Errc::NotAdmissible: return "NotAdmissible";
    case Errc::NegativeRadicand: return "NegativeRadicand";
    case Errc::BranchMismatch: return "BranchMismatch";
    case Errc::NegativeC0: return "NegativeC0";
    case Errc::GridNotUniform: return "GridNotUniform";
    case Errc::TailEstimateUnavailable: return "TailEstimateUnavailable";
    case Errc::TooFewPaths: return "TooFewPaths";
    case Errc::GramSingular: return "GramSingular";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

bool is_numerical(Errc code) noexcept {
  switch (code) {
    case Errc::QuadratureNonConvergence:
    case Errc::OracleNonConvergence:
    case Errc::NonConvergence:
    case Errc::GramSingular:
    case Errc::NegativeRadicand:
      return true;
    default:
      return false;
  }
}

}  // namespace specgauss
