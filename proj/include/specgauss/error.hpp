#pragma once

#include <stdexcept>
#include <string>

namespace specgauss {

enum class Errc {
  BadParameter,
  NonFiniteEvaluation,
  QuadratureNonConvergence,
  SingularityTooStrong,
  OracleNonConvergence,
  InsufficientData,
  DeltaOutOfRange,
  NotAdmissible,
  NegativeRadicand,
  BranchMismatch,
  NegativeC0,
  GridNotUniform,
  TailEstimateUnavailable,
  TooFewPaths,
  GramSingular,
  NonConvergence,
  Io,
};

const char* to_string(Errc code) noexcept;

// Failures of an iterative numerical method, as opposed to bad input.
bool is_numerical(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace specgauss
