#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mlr {

enum class ErrorCode {
  // numerical
  NotPositiveDefinite,
  ShapeMismatch,
  NonScalarRoot,
  NonFiniteGradient,
  NotFinalized,
  DegenerateClass,
  // data
  IoError,
  NoHeader,
  EmptyTable,
  NoUsableFeatures,
  SingleClassTarget,
  SchemaMismatch,
  TooFewSamples,
  ZeroVariance,
  SingleClass,
  BadModelFile,
  UnsupportedTarget,
  // orchestration
  EmptyEnsemble,
  EnsembleFailed,
  InvalidConfig,
};

enum class ErrorCategory { Data, Training, Config };

std::string_view to_string(ErrorCode code);
ErrorCategory category_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace mlr
