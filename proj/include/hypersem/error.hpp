#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hypersem {

enum class ErrorCode {
  InvalidArgument,
  ZeroVector,
  DimensionMismatch,
  SpaceMismatch,
  NonFinite,
  OutOfRange,
  DegenerateProjection,
  SingleClass,
  EmptyDataset,
  GramNotRepairable,
  DimensionTooSmall,
  UnknownAttribute,
  NoConvergence,
  KTooLarge,
  ZeroVariance,
  QualityBoundaryMissing,
  IoFailure,
  MalformedFile,
  UnitNormViolation,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// I/O-class failures map to a different CLI exit code than validation failures.
bool is_io_error(ErrorCode code);

}  // namespace hypersem
