#include "netdiff/error.hpp"

namespace netdiff {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::InvalidSize: return "InvalidSize";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateWeights: return "DegenerateWeights";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::DegenerateV2: return "DegenerateV2";
    case ErrorCode::MissingDraws: return "MissingDraws";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::InvalidAlpha: return "InvalidAlpha";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::OrphanNode: return "OrphanNode";
    case ErrorCode::EmptyPanel: return "EmptyPanel";
    case ErrorCode::Io: return "Io";
    case ErrorCode::McAborted: return "McAborted";
  }
  return "Unknown";
}

bool Error::is_validation() const noexcept {
  switch (code_) {
    case ErrorCode::IndexOutOfRange:
    case ErrorCode::SelfLoop:
    case ErrorCode::InvalidProbability:
    case ErrorCode::InvalidSize:
    case ErrorCode::InvalidArgument:
    case ErrorCode::LengthMismatch:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::InvalidAlpha:
    case ErrorCode::SchemaError:
    case ErrorCode::OrphanNode:
    case ErrorCode::EmptyPanel:
      return true;
    default:
      return false;
  }
}

}  // namespace netdiff
