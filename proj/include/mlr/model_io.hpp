#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mlr/data.hpp"
#include "mlr/ensemble.hpp"

namespace mlr {

/// What a model file holds: one or more finalized networks, how to combine
/// them, and the fitted input/target transform.
struct SavedModel {
  EnsembleKind kind = EnsembleKind::Single;
  TaskKind task = TaskKind::Regression;
  std::vector<TrainedModel> members;
  std::vector<double> validation_scores;  // one per member, drives best/top5
  FittedTransform transform;

  /// Aggregated output on transformed features: standardized regression
  /// scores, or class-1 probabilities.
  Matrix predict(const Matrix& x) const;

  bool operator==(const SavedModel&) const = default;
};

SavedModel saved_model_from(const Ensemble& ensemble, const FittedTransform& transform);

/// Layout, all integers and floats little-endian:
///   "MLR1", u32 format version, u32 task, u32 ensemble kind, u64 members
///   per member: u32 depth, u32 head, u64 d, u64 J, u64 hidden layers,
///               f64 validation score, then every W^l and b^l as
///               (u64 rows, u64 cols, f64 values), learned W^L if any,
///               f64 log lambda-hat, W_out
///   transform state: features, dropped columns, target name, target
///               mean/scale, class labels
void save_model(const SavedModel& model, std::ostream& out);
void save_model(const SavedModel& model, const std::string& path);
/// Throws BadModelFile on a wrong magic, version, or truncated input.
SavedModel load_model(std::istream& in);
SavedModel load_model(const std::string& path);

}  // namespace mlr
