#include "mlr/errors.hpp"

namespace mlr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonScalarRoot: return "NonScalarRoot";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::NotFinalized: return "NotFinalized";
    case ErrorCode::DegenerateClass: return "DegenerateClass";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NoHeader: return "NoHeader";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::NoUsableFeatures: return "NoUsableFeatures";
    case ErrorCode::SingleClassTarget: return "SingleClassTarget";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::BadModelFile: return "BadModelFile";
    case ErrorCode::UnsupportedTarget: return "UnsupportedTarget";
    case ErrorCode::EmptyEnsemble: return "EmptyEnsemble";
    case ErrorCode::EnsembleFailed: return "EnsembleFailed";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::NoHeader:
    case ErrorCode::EmptyTable:
    case ErrorCode::NoUsableFeatures:
    case ErrorCode::SingleClassTarget:
    case ErrorCode::SchemaMismatch:
    case ErrorCode::TooFewSamples:
    case ErrorCode::ZeroVariance:
    case ErrorCode::SingleClass:
    case ErrorCode::BadModelFile:
    case ErrorCode::UnsupportedTarget:
      return ErrorCategory::Data;
    case ErrorCode::InvalidConfig:
      return ErrorCategory::Config;
    default:
      return ErrorCategory::Training;
  }
}

}  // namespace mlr
