#pragma once

#include <stdexcept>
#include <string>

namespace monocheck {

enum class ErrorCode {
  // Input and validation failures.
  kInvalidArgument,
  kDimensionMismatch,
  kOutOfRange,
  kIo,
  kFormat,
  kSchema,
  // Numerical failures.
  kBehindCamera,
  kNonPositiveDepth,
  kNonConvergence,
  kDegenerateGeometry,
  kDegenerateSample,
  kCoplanar,
  kTooFewPoints,
  kNoConsensus,
  kEmptyStatistics,
  kEmptyMask,
  kVacuumRay,
  kOutOfDomain,
};

const char* to_string(ErrorCode code);

/// True for failures of the numerical machinery (as opposed to bad input).
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace monocheck
