#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mlr/training.hpp"

namespace mlr {

enum class EnsembleKind { Single, Bag, Ens, Best, Top5 };

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::Single;
  std::vector<int> depths;  // one entry per member

  static EnsembleSpec single(int depth);
  /// `members` networks of one depth.
  static EnsembleSpec bag(int depth, std::size_t members = 10);
  /// Ens, Best and Top5 share a pool of ten depth-1 and ten depth-2 members.
  static EnsembleSpec pool(EnsembleKind kind);
  /// single, bag1..bag4, ens, best, top5.
  static EnsembleSpec parse(const std::string& name, int depth);
};

struct Member {
  TrainResult result;
  std::uint64_t seed = 0;
  int depth = 0;
  bool failed = false;
  std::string error;

  double validation_score() const { return result.record.best_validation_score; }
};

struct Ensemble {
  EnsembleKind kind = EnsembleKind::Single;
  TaskKind task = TaskKind::Regression;
  std::vector<Member> members;

  std::size_t healthy() const;
};

/// Member i uses seed master_seed + i and its own validation split. Members run
/// concurrently on `workers` threads; the result does not depend on it.
/// Throws EnsembleFailed when more than half of the members fail.
Ensemble train_ensemble(const EnsembleSpec& spec, const MlrConfig& base, const Matrix& x, const Matrix& y,
                        std::uint64_t master_seed, std::size_t workers = 1);

/// Pure fold over member outputs. Regression: raw scores. Classification: the
/// result is a probability, members contribute logistic(score).
Matrix aggregate_predictions(std::span<const Matrix> member_scores, std::span<const double> validation_scores,
                             EnsembleKind kind, TaskKind task);

/// Member indices that contribute for `kind`: all, the best one, or the best five
/// (ties go to the lower index).
std::vector<std::size_t> selected_members(std::span<const double> validation_scores, EnsembleKind kind);

/// Aggregated prediction over the healthy members. Throws EmptyEnsemble.
Matrix ensemble_predict(const Ensemble& ensemble, const Matrix& x);

}  // namespace mlr
