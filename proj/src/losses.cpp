#include <cmath>

#include "mlr/model.hpp"

namespace mlr {

using autograd::NodeId;
using autograd::Tape;

Matrix permuted_targets(const Matrix& y, const PermutationSet& perms) {
  if (y.cols() != 1) throw Error(ErrorCode::ShapeMismatch, "labels must be a column vector");
  const std::size_t n = y.rows();
  const std::size_t t_count = perms.size();
  Matrix out(n, t_count + 1);
  for (std::size_t i = 0; i < n; ++i) out(i, 0) = y[i];
  for (std::size_t t = 0; t < t_count; ++t) {
    const auto& p = perms.perms[t];
    if (p.size() != n) throw Error(ErrorCode::ShapeMismatch, "permutation size does not match labels");
    for (std::size_t i = 0; i < n; ++i) out(i, t + 1) = y[p[i]];
  }
  return out;
}

Matrix label_dither(Matrix targets, Real sigma, Rng& rng) {
  if (sigma == Real(0)) return targets;
  for (auto& v : targets.flat()) v += sigma * rng.normal();
  return targets;
}

Matrix structured_noise(std::size_t n, std::size_t permutations, Real sigma, Rng& rng) {
  if (sigma == Real(0)) return {};
  return rng.normal_matrix(n, permutations + 1, sigma);
}

LossBatch regression_batch(const Matrix& y, const Matrix& targets, const Matrix& noise) {
  if (targets.rows() != y.rows() || targets.cols() < 1) throw Error(ErrorCode::ShapeMismatch, "targets do not match labels");
  if (!noise.empty()) require_same_shape(noise, targets, "structured noise");
  LossBatch b;
  b.targets = targets;
  b.noise = noise;
  Real mean = 0;
  for (Real v : y.flat()) mean += v;
  mean /= static_cast<Real>(y.rows());
  Real ss = 0;
  for (Real v : y.flat()) ss += (v - mean) * (v - mean);
  b.baseline = std::sqrt(ss / static_cast<Real>(y.rows()));
  return b;
}

LossBatch classification_batch(const Matrix& y, const PermutationSet& perms, const Matrix& noise) {
  Real mean = 0;
  for (Real v : y.flat()) {
    if (v != 0 && v != 1) throw Error(ErrorCode::ShapeMismatch, "classification labels must be 0 or 1");
    mean += v;
  }
  mean /= static_cast<Real>(y.rows());
  if (mean == 0 || mean == 1) throw Error(ErrorCode::DegenerateClass, "batch contains a single class");
  Matrix signed_y = y;
  for (auto& v : signed_y.flat()) v = 2 * v - 1;
  LossBatch b;
  b.targets = permuted_targets(signed_y, perms);
  b.classes = permuted_targets(y, perms);
  b.noise = noise;
  if (!noise.empty()) require_same_shape(noise, b.targets, "structured noise");
  // BCE of a constant logit logit(p) against Y is the entropy of the class prior.
  b.baseline = -(mean * std::log(mean) + (1 - mean) * std::log(1 - mean));
  return b;
}

NodeId ridge_apply(Tape& tape, NodeId a, NodeId lambda, NodeId v, RidgeForm form) {
  const Matrix& av = tape.value(a);
  if (resolve_form(form, av.rows(), av.cols()) == RidgeForm::Gram) {
    const NodeId m = tape.add_diag(tape.matmul_tn(a, a), lambda);
    const NodeId z = tape.spd_solve(m, tape.matmul_tn(a, v));
    return tape.matmul(a, z);
  }
  // A (A^T A + lambda I)^{-1} A^T = K (K + lambda I)^{-1} with K = A A^T.
  const NodeId k = tape.matmul_nt(a, a);
  const NodeId z = tape.spd_solve(tape.add_diag(k, lambda), v);
  return tape.matmul(k, z);
}

namespace {

NodeId projection_input(Tape& tape, const LossBatch& batch) {
  return tape.constant(batch.noise.empty() ? batch.targets : hconcat(batch.targets, batch.noise));
}

// loss = first + mean_t |baseline - per_column[t]|, first = per_column[0].
NodeId combine(Tape& tape, NodeId per_column, Real baseline, std::size_t t_count) {
  const NodeId first = tape.slice_cols(per_column, 0, 1);
  if (t_count == 0) return first;
  const NodeId permuted = tape.slice_cols(per_column, 1, t_count);
  const NodeId gap = tape.abs(tape.add_scalar(tape.scale(permuted, Real(-1)), baseline));
  return tape.add(first, tape.mean(gap));
}

}  // namespace

NodeId mlr_loss_from_projection(Tape& tape, NodeId hv, const LossBatch& batch) {
  const std::size_t cols = batch.targets.cols();
  const std::size_t t_count = cols - 1;
  // RMSE(target + (I - H) xi ; H target) per column = rms(target - H target + xi - H xi)
  const NodeId v = projection_input(tape, batch);
  const NodeId s = tape.sub(v, hv);
  NodeId residual = s;
  if (!batch.noise.empty()) residual = tape.add(tape.slice_cols(s, 0, cols), tape.slice_cols(s, cols, cols));
  const NodeId rmse = tape.sqrt(tape.mean_rows(tape.square(residual)));
  return combine(tape, rmse, batch.baseline, t_count);
}

NodeId bce_mlr_loss_from_projection(Tape& tape, NodeId hv, const LossBatch& batch) {
  if (batch.classes.empty()) throw Error(ErrorCode::ShapeMismatch, "classification batch has no class targets");
  const std::size_t cols = batch.targets.cols();
  const std::size_t t_count = cols - 1;
  const NodeId targets = tape.constant(batch.targets);
  // logits = Y* + (I - H) xi + H Y*
  NodeId logits;
  if (batch.noise.empty()) {
    logits = tape.add(targets, hv);
  } else {
    const NodeId noise = tape.constant(batch.noise);
    const NodeId h_targets = tape.slice_cols(hv, 0, cols);
    const NodeId h_noise = tape.slice_cols(hv, cols, cols);
    logits = tape.add(tape.add(targets, tape.sub(noise, h_noise)), h_targets);
  }
  // BCE with logits z against y: mean(softplus(z) - y z)
  const NodeId classes = tape.constant(batch.classes);
  const NodeId bce = tape.mean_rows(tape.sub(tape.softplus(logits), tape.mul(classes, logits)));
  return combine(tape, bce, batch.baseline, t_count);
}

NodeId mlr_loss(Tape& tape, NodeId a, NodeId lambda, const LossBatch& batch, RidgeForm form) {
  const NodeId hv = ridge_apply(tape, a, lambda, projection_input(tape, batch), form);
  return mlr_loss_from_projection(tape, hv, batch);
}

NodeId bce_mlr_loss(Tape& tape, NodeId a, NodeId lambda, const LossBatch& batch, RidgeForm form) {
  const NodeId hv = ridge_apply(tape, a, lambda, projection_input(tape, batch), form);
  return bce_mlr_loss_from_projection(tape, hv, batch);
}

Real mlr_loss_given_hat(const Matrix& hat, const LossBatch& batch) {
  Tape tape;
  const Matrix v = batch.noise.empty() ? batch.targets : hconcat(batch.targets, batch.noise);
  const NodeId hv = tape.constant(kernels::matmul(hat, v));
  return tape.value(mlr_loss_from_projection(tape, hv, batch)).scalar_value();
}

Real bce_mlr_loss_given_hat(const Matrix& hat, const LossBatch& batch) {
  Tape tape;
  const Matrix v = batch.noise.empty() ? batch.targets : hconcat(batch.targets, batch.noise);
  const NodeId hv = tape.constant(kernels::matmul(hat, v));
  return tape.value(bce_mlr_loss_from_projection(tape, hv, batch)).scalar_value();
}

Real mlr_loss(const Matrix& a, Real lambda, const LossBatch& batch, RidgeForm form) {
  Tape tape;
  const NodeId loss = mlr_loss(tape, tape.constant(a), tape.constant(Matrix::scalar(lambda)), batch, form);
  return tape.value(loss).scalar_value();
}

Real bce_mlr_loss(const Matrix& a, Real lambda, const LossBatch& batch, RidgeForm form) {
  Tape tape;
  const NodeId loss = bce_mlr_loss(tape, tape.constant(a), tape.constant(Matrix::scalar(lambda)), batch, form);
  return tape.value(loss).scalar_value();
}

Real task_loss(TaskKind task, const Matrix& a, Real lambda, const LossBatch& batch, RidgeForm form) {
  return task == TaskKind::Regression ? mlr_loss(a, lambda, batch, form) : bce_mlr_loss(a, lambda, batch, form);
}

}  // namespace mlr
