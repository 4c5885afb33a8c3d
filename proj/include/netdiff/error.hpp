#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace netdiff {

enum class ErrorCode {
  IndexOutOfRange,
  SelfLoop,
  InvalidProbability,
  InvalidSize,
  InvalidArgument,
  LengthMismatch,
  DimensionMismatch,
  DegenerateWeights,
  NonFinite,
  Singular,
  NotConverged,
  EmptySubset,
  DegenerateV2,
  MissingDraws,
  DegenerateVariance,
  InvalidAlpha,
  SchemaError,
  OrphanNode,
  EmptyPanel,
  Io,
  McAborted,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // Validation problems map to CLI exit status 2, everything else to 1.
  bool is_validation() const noexcept;

 private:
  ErrorCode code_;
};

}  // namespace netdiff
