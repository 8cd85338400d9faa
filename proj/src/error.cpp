#include "hypersem/error.hpp"

namespace hypersem {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SpaceMismatch: return "SpaceMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DegenerateProjection: return "DegenerateProjection";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::GramNotRepairable: return "GramNotRepairable";
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::UnknownAttribute: return "UnknownAttribute";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::QualityBoundaryMissing: return "QualityBoundaryMissing";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::UnitNormViolation: return "UnitNormViolation";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

bool is_io_error(ErrorCode code) {
  return code == ErrorCode::IoFailure || code == ErrorCode::MalformedFile;
}

}  // namespace hypersem
