#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mlr/autograd.hpp"
#include "mlr/linalg.hpp"
#include "mlr/matrix.hpp"
#include "mlr/rng.hpp"

namespace mlr {

enum class TaskKind { Regression, Classification };

/// Ridge: closed-form output layer (the MLR network).
/// Learned: ordinary trainable W^L fitted with an MSE loss (plain FFNN baseline).
enum class HeadKind { Ridge, Learned };

struct MlrConfig {
  int depth = 2;                 // L in {1, 2, 3, 4}; L = 1 has no hidden layer
  std::size_t width = 1024;      // J
  std::size_t permutations = 16; // T
  double label_dither = 0.03;    // sigma tilde; forced to 0 for classification
  double struct_dither = 1.0;    // sigma of the structured dithering noise
  double learning_rate = 1e-3;
  std::size_t max_iter = 200;
  double budget_seconds = 300;
  bool enforce_budget = true;    // false = deterministic mode
  std::optional<std::size_t> batch_size;  // default min(n, J)
  double validation_fraction = 0.2;
  std::optional<double> lambda_init;      // bypasses the grid heuristic
  HeadKind head = HeadKind::Ridge;
  RidgeForm ridge_form = RidgeForm::Auto;
  TaskKind task = TaskKind::Regression;

  /// Learning rate and iteration cap for depth L:
  /// L=1: 1e-2 / 200, L=2: 1e-3 / 200, L=3: 10^-3.5 / 400, L=4: 1e-4 / 400.
  static MlrConfig for_depth(int depth, TaskKind task = TaskKind::Regression);
  void apply_depth_defaults(int new_depth);
  void validate() const;
};

/// theta and log(lambda). The closed-form head replaces W^L, so for depth L
/// there are L-1 hidden weight matrices.
struct ModelParams {
  std::vector<Matrix> weights;  // W^1: d x J, W^l: J x J
  std::vector<Matrix> biases;   // b^l: 1 x J
  Matrix output;                // J x 1, only for HeadKind::Learned
  Real log_lambda = 0;
  std::size_t input_dim = 0;
  std::size_t width = 0;
  int depth = 1;

  std::size_t feature_width() const { return depth == 1 ? input_dim : width; }
  Real lambda() const { return std::exp(log_lambda); }

  /// Trainable tensors in slot order: weights, biases, output (if any), log_lambda.
  std::size_t slot_count() const;
  std::vector<Matrix> tensors() const;
  void assign(std::span<const Matrix> tensors);
  /// Mutable views over every trainable scalar, in slot order.
  std::vector<std::span<Real>> views();

  bool operator==(const ModelParams&) const = default;
};

/// Biases zero; W^1 ~ U(+-sqrt(6/(d+J))), hidden W^l ~ U(+-sqrt(6/(2J))).
/// A learned head draws W^L ~ U(+-sqrt(6/(d+1))).
ModelParams init_weights(std::size_t input_dim, std::size_t width, int depth, std::uint64_t seed,
                         HeadKind head = HeadKind::Ridge);

/// Last hidden activation A^{L-1}; A^0 = x when L = 1.
Matrix forward_hidden(const ModelParams& params, const Matrix& x);

struct ParamNodes {
  std::vector<autograd::NodeId> weights;
  std::vector<autograd::NodeId> biases;
  std::optional<autograd::NodeId> output;
  autograd::NodeId log_lambda;
};

ParamNodes register_params(autograd::Tape& tape, const ModelParams& params);
autograd::NodeId forward_hidden(autograd::Tape& tape, const ParamNodes& nodes, autograd::NodeId x, int depth);

// ---------------------------------------------------------------------------
// Permutations

struct PermutationSet {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::size_t>> perms;  // perms[t][i] = pi_t(i), 0-based

  std::size_t size() const noexcept { return perms.size(); }
  /// (Y_{pi(0)}, ..., Y_{pi(n-1)})
  Matrix apply(std::size_t t, const Matrix& y) const;
};

/// T independent uniform permutations of {0..n-1} by Fisher-Yates.
PermutationSet sample_permutations(std::size_t n, std::size_t count, std::uint64_t seed);
std::vector<std::size_t> invert_permutation(std::span<const std::size_t> perm);

// ---------------------------------------------------------------------------
// Losses

/// Everything the MLR losses consume besides A and lambda. Columns are
/// (observed labels, permuted copy 1, ..., permuted copy T).
struct LossBatch {
  Matrix targets;  // n x (T+1); regression: Y_eps and pi_eps^t(Y); classification: Y* and pi^t(Y*)
  Matrix noise;    // n x (T+1): xi, xi_1..xi_T scaled by sigma; empty when sigma = 0
  Matrix classes;  // classification only: n x (T+1) targets in {0,1}
  Real baseline = 0;  // RMSE(Y; mean(Y) 1) or BCE(Y; logit(mean Y) 1)

  std::size_t permutation_count() const { return targets.cols() - 1; }
};

/// Columns (Y, pi^1(Y), ..., pi^T(Y)).
Matrix permuted_targets(const Matrix& y, const PermutationSet& perms);

/// Adds fresh N(0, sigma^2) draws to every column. sigma = 0 returns the input.
Matrix label_dither(Matrix targets, Real sigma, Rng& rng);

/// Regression batch. Label dither is not applied here; see label_dither.
LossBatch regression_batch(const Matrix& y, const Matrix& targets, const Matrix& noise);
/// Classification batch for binary y; throws DegenerateClass for a single-class batch.
LossBatch classification_batch(const Matrix& y, const PermutationSet& perms, const Matrix& noise);

/// sigma * N(0, I) noise for (T+1) columns, or an empty matrix when sigma = 0.
Matrix structured_noise(std::size_t n, std::size_t permutations, Real sigma, Rng& rng);

/// H V for H = A (A^T A + lambda I)^{-1} A^T, built from differentiable primitives.
autograd::NodeId ridge_apply(autograd::Tape& tape, autograd::NodeId a, autograd::NodeId lambda,
                             autograd::NodeId v, RidgeForm form);

autograd::NodeId mlr_loss(autograd::Tape& tape, autograd::NodeId a, autograd::NodeId lambda,
                          const LossBatch& batch, RidgeForm form = RidgeForm::Auto);
autograd::NodeId bce_mlr_loss(autograd::Tape& tape, autograd::NodeId a, autograd::NodeId lambda,
                              const LossBatch& batch, RidgeForm form = RidgeForm::Auto);

/// The same losses given hv = H [targets | noise] (or H targets when noise is
/// empty). Lets callers plug in an explicit projector.
autograd::NodeId mlr_loss_from_projection(autograd::Tape& tape, autograd::NodeId hv, const LossBatch& batch);
autograd::NodeId bce_mlr_loss_from_projection(autograd::Tape& tape, autograd::NodeId hv, const LossBatch& batch);
Real mlr_loss_given_hat(const Matrix& hat, const LossBatch& batch);
Real bce_mlr_loss_given_hat(const Matrix& hat, const LossBatch& batch);

/// Value-only conveniences.
Real mlr_loss(const Matrix& a, Real lambda, const LossBatch& batch, RidgeForm form = RidgeForm::Auto);
Real bce_mlr_loss(const Matrix& a, Real lambda, const LossBatch& batch, RidgeForm form = RidgeForm::Auto);
Real task_loss(TaskKind task, const Matrix& a, Real lambda, const LossBatch& batch, RidgeForm form = RidgeForm::Auto);

// ---------------------------------------------------------------------------
// Ridge initialization

/// { 10^-1 * 10^(5k/11) : k = 0..11 }
std::vector<Real> lambda_grid();

struct LambdaInit {
  Real lambda = 0;
  std::size_t k_hat = 0;
  std::vector<Real> losses;  // loss at each grid point
  bool operator==(const LambdaInit&) const = default;
};

/// k_hat = argmax_k (loss(lambda_{k+1}) - loss(lambda_k)), ties to the smaller k;
/// lambda_init = sqrt(lambda_k_hat * lambda_{k_hat+1}), clamped to the grid range.
LambdaInit init_lambda(const Matrix& activations, const LossBatch& batch, TaskKind task,
                       std::span<const Real> grid, RidgeForm form = RidgeForm::Auto);

// ---------------------------------------------------------------------------
// Prediction

struct TrainedModel {
  ModelParams params;
  Matrix output_weights;  // W_out = P(theta, lambda, x_train) Y_train, J x 1
  TaskKind task = TaskKind::Regression;
  HeadKind head = HeadKind::Ridge;
  bool finalized = false;

  /// Raw scores A^{L-1}(x) W_out (standardized-target scale, or the +-1 scale
  /// for classification).
  Matrix predict(const Matrix& x) const;

  bool operator==(const TrainedModel&) const = default;
};

/// Caches W_out from the full training split. Classification regresses on Y* = 2Y - 1.
TrainedModel finalize_model(ModelParams params, const Matrix& x_train, const Matrix& y_train, TaskKind task,
                            HeadKind head = HeadKind::Ridge, RidgeForm form = RidgeForm::Auto);

/// 1 iff score > 0.
std::vector<int> hardmax_label(std::span<const Real> scores);
Real logistic(Real x);

}  // namespace mlr
