#include "monocheck/error.hpp"

namespace monocheck {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kOutOfRange: return "out-of-range";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kBehindCamera: return "point-behind-camera";
    case ErrorCode::kNonPositiveDepth: return "non-positive-depth";
    case ErrorCode::kNonConvergence: return "non-convergence";
    case ErrorCode::kDegenerateGeometry: return "degenerate-geometry";
    case ErrorCode::kDegenerateSample: return "degenerate-sample";
    case ErrorCode::kCoplanar: return "coplanar";
    case ErrorCode::kTooFewPoints: return "too-few-points";
    case ErrorCode::kNoConsensus: return "no-consensus";
    case ErrorCode::kEmptyStatistics: return "empty-statistics";
    case ErrorCode::kEmptyMask: return "empty-mask";
    case ErrorCode::kVacuumRay: return "vacuum-ray";
    case ErrorCode::kOutOfDomain: return "out-of-domain";
  }
  return "unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kOutOfRange:
    case ErrorCode::kIo:
    case ErrorCode::kFormat:
    case ErrorCode::kSchema:
      return false;
    default:
      return true;
  }
}

}  // namespace monocheck
