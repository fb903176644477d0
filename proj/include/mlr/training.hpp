#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mlr/autograd.hpp"
#include "mlr/model.hpp"

namespace mlr {

struct AdamState {
  std::vector<Matrix> first;
  std::vector<Matrix> second;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState zeros_like(std::span<const Matrix> params);
};

/// Bias-corrected Adam update in place. Throws NonFiniteGradient before touching
/// anything if a gradient entry is not finite.
void adam_step(std::span<const std::span<Real>> params, std::span<const Matrix> grads, AdamState& state, double lr);
void adam_step(ModelParams& params, const autograd::GradientMap& grads, AdamState& state, double lr);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  bool operator==(const SplitIndices&) const = default;
};

/// floor(fraction * n) validation rows (at least 1), drawn uniformly without
/// stratification. Needs n >= 5.
SplitIndices split_validation(std::size_t n, double fraction, std::uint64_t seed);

struct IterationLog {
  std::size_t iteration = 0;   // 0 = initial parameters, before any update
  double validation_score = 0;
  double train_loss = 0;       // NaN at iteration 0 and for skipped updates
  double seconds = 0;          // wall clock since the start of training
  bool update_skipped = false; // non-finite gradient
  bool operator==(const IterationLog&) const = default;
};

struct TrainRecord {
  std::vector<IterationLog> log;
  std::size_t best_iteration = 0;
  double best_validation_score = 0;
  Matrix best_validation_predictions;  // raw scores at best_iteration
  LambdaInit lambda_init;               // k_hat/losses empty when lambda was given
  double final_lambda = 0;
  std::size_t iterations = 0;           // updates attempted
  std::size_t skipped_updates = 0;
  bool budget_exhausted = false;
  std::size_t batch_size = 0;
  SplitIndices split;

  bool operator==(const TrainRecord&) const = default;
};

struct TrainResult {
  TrainedModel model;
  TrainRecord record;
};

/// Called with the row indices (into x) of every training batch.
using BatchObserver = std::function<void(std::size_t iteration, std::span<const std::size_t> rows)>;

/// Validation score used for early stopping: R^2 for regression (-MSE when the
/// validation targets are constant), accuracy of sign(score) for classification.
double validation_score(TaskKind task, const Matrix& y_true, const Matrix& scores);

/// Trains on standardized features x (n x d) and targets y (n x 1; {0,1} for
/// classification). Parameters are restored from the best validation iteration
/// and W_out is refit on the training part of the split.
TrainResult train(const MlrConfig& config, const Matrix& x, const Matrix& y, std::uint64_t seed,
                  const BatchObserver& observer = {});

}  // namespace mlr
