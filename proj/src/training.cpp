#include "mlr/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace mlr {

using autograd::NodeId;
using autograd::Tape;

AdamState AdamState::zeros_like(std::span<const Matrix> params) {
  AdamState s;
  for (const auto& p : params) {
    s.first.emplace_back(p.rows(), p.cols());
    s.second.emplace_back(p.rows(), p.cols());
  }
  return s;
}

void adam_step(std::span<const std::span<Real>> params, std::span<const Matrix> grads, AdamState& state, double lr) {
  if (params.size() != grads.size() || state.first.size() != params.size()) {
    throw Error(ErrorCode::ShapeMismatch, "adam: parameter, gradient and moment counts differ");
  }
  for (std::size_t s = 0; s < params.size(); ++s) {
    if (grads[s].size() != params[s].size() || state.first[s].size() != params[s].size()) {
      throw Error(ErrorCode::ShapeMismatch, "adam: slot " + std::to_string(s) + " has mismatched sizes");
    }
    if (!all_finite(grads[s])) throw Error(ErrorCode::NonFiniteGradient, "adam: slot " + std::to_string(s));
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t s = 0; s < params.size(); ++s) {
    auto p = params[s];
    const auto g = grads[s].flat();
    auto m = state.first[s].flat();
    auto v = state.second[s].flat();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i];
      m[i] = static_cast<Real>(state.beta1 * m[i] + (1.0 - state.beta1) * gi);
      v[i] = static_cast<Real>(state.beta2 * v[i] + (1.0 - state.beta2) * gi * gi);
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= static_cast<Real>(lr * m_hat / (std::sqrt(v_hat) + state.eps));
    }
  }
}

void adam_step(ModelParams& params, const autograd::GradientMap& grads, AdamState& state, double lr) {
  auto views = params.views();
  adam_step(std::span<const std::span<Real>>(views), grads.all(), state, lr);
}

SplitIndices split_validation(std::size_t n, double fraction, std::uint64_t seed) {
  if (n < 5) throw Error(ErrorCode::TooFewSamples, "need at least 5 rows for a validation split, got " + std::to_string(n));
  if (!(fraction > 0 && fraction < 1)) throw Error(ErrorCode::InvalidConfig, "validation fraction must lie in (0, 1)");
  const auto n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n))));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);
  SplitIndices out;
  out.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  out.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(out.validation.begin(), out.validation.end());
  std::sort(out.train.begin(), out.train.end());
  return out;
}

double validation_score(TaskKind task, const Matrix& y_true, const Matrix& scores) {
  require_same_shape(y_true, scores, "validation scores");
  const std::size_t n = y_true.rows();
  if (task == TaskKind::Classification) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += (scores[i] > 0 ? 1.0 : 0.0) == y_true[i];
    return static_cast<double>(hits) / static_cast<double>(n);
  }
  double mean = 0;
  for (std::size_t i = 0; i < n; ++i) mean += y_true[i];
  mean /= static_cast<double>(n);
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ss_res += (y_true[i] - scores[i]) * (y_true[i] - scores[i]);
    ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
  }
  if (ss_tot == 0) return -ss_res / static_cast<double>(n);
  return 1.0 - ss_res / ss_tot;
}

namespace {

using Clock = std::chrono::steady_clock;

// Epoch-shuffled batches of the training rows; the tail that does not fill a
// batch is dropped. A full batch keeps the original row order.
class BatchSchedule {
 public:
  BatchSchedule(std::vector<std::size_t> rows, std::size_t batch, std::uint64_t seed)
      : rows_(std::move(rows)), batch_(batch), rng_(seed) {}

  std::vector<std::size_t> next() {
    if (batch_ == rows_.size()) return rows_;
    if (cursor_ + batch_ > order_.size()) {
      order_ = rows_;
      for (std::size_t i = order_.size() - 1; i > 0; --i) std::swap(order_[i], order_[rng_.index(i + 1)]);
      cursor_ = 0;
    }
    std::vector<std::size_t> out(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                                 order_.begin() + static_cast<std::ptrdiff_t>(cursor_ + batch_));
    cursor_ += batch_;
    return out;
  }

 private:
  std::vector<std::size_t> rows_;
  std::vector<std::size_t> order_;
  std::size_t batch_;
  std::size_t cursor_ = 0;
  Rng rng_;
};

LossBatch make_batch(TaskKind task, const Matrix& y, const PermutationSet& perms, const Matrix& noise,
                     Real label_sigma, Rng* dither_rng) {
  if (task == TaskKind::Classification) return classification_batch(y, perms, noise);
  Matrix targets = permuted_targets(y, perms);
  if (dither_rng != nullptr) targets = label_dither(std::move(targets), label_sigma, *dither_rng);
  return regression_batch(y, targets, noise);
}

// Plain network with a trainable last layer: MSE for regression, BCE on logits
// for classification.
NodeId learned_head_loss(Tape& tape, NodeId a, NodeId w, const Matrix& y, TaskKind task) {
  const NodeId scores = tape.matmul(a, w);
  const NodeId target = tape.constant(y);
  if (task == TaskKind::Regression) return tape.mean(tape.square(tape.sub(scores, target)));
  return tape.mean(tape.sub(tape.softplus(scores), tape.mul(target, scores)));
}

}  // namespace

TrainResult train(const MlrConfig& config_in, const Matrix& x, const Matrix& y, std::uint64_t seed,
                  const BatchObserver& observer) {
  MlrConfig config = config_in;
  config.validate();
  if (config.task == TaskKind::Classification) config.label_dither = 0;
  if (x.rows() != y.rows() || y.cols() != 1) throw Error(ErrorCode::ShapeMismatch, "x and y row counts differ");
  if (!all_finite(x) || !all_finite(y)) throw Error(ErrorCode::InvalidConfig, "training data contains non-finite values");

  const auto start = Clock::now();
  const auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  TrainRecord rec;
  rec.split = split_validation(x.rows(), config.validation_fraction, derive_seed(seed, streams::kValidationSplit));
  const Matrix x_train = select_rows(x, rec.split.train);
  const Matrix y_train = select_rows(y, rec.split.train);
  const Matrix x_val = select_rows(x, rec.split.validation);
  const Matrix y_val = select_rows(y, rec.split.validation);
  const std::size_t n_train = x_train.rows();

  const std::size_t batch = std::min(config.batch_size.value_or(std::min(n_train, config.width)), n_train);
  rec.batch_size = batch;
  ModelParams params = init_weights(x.cols(), config.width, config.depth, derive_seed(seed, streams::kInit), config.head);

  const PermutationSet perms = sample_permutations(batch, config.permutations, derive_seed(seed, streams::kPermutations));
  std::vector<std::size_t> local(n_train);
  std::iota(local.begin(), local.end(), std::size_t{0});
  BatchSchedule schedule(local, batch, derive_seed(seed, streams::kBatches));
  Rng dither_rng(derive_seed(seed, streams::kLabelDither));
  Rng noise_rng(derive_seed(seed, streams::kStructDither));
  const auto sigma_struct = static_cast<Real>(config.struct_dither);
  const auto sigma_label = static_cast<Real>(config.label_dither);

  std::vector<std::size_t> first_rows = schedule.next();
  if (config.lambda_init) {
    rec.lambda_init.lambda = static_cast<Real>(*config.lambda_init);
  } else if (config.head == HeadKind::Ridge) {
    // Structured noise is left out so the starting point depends only on the
    // network, the labels and the permutations.
    const Matrix y_b = select_rows(y_train, first_rows);
    const LossBatch lb = make_batch(config.task, y_b, perms, Matrix{}, 0, nullptr);
    const Matrix a = forward_hidden(params, select_rows(x_train, first_rows));
    const auto grid = lambda_grid();
    rec.lambda_init = init_lambda(a, lb, config.task, grid, config.ridge_form);
  } else {
    rec.lambda_init.lambda = 1;
  }
  params.log_lambda = std::log(rec.lambda_init.lambda);

  ModelParams best = params;
  const auto evaluate = [&](std::size_t iteration, double loss, bool skipped) {
    const TrainedModel m = finalize_model(params, x_train, y_train, config.task, config.head, config.ridge_form);
    Matrix pred = m.predict(x_val);
    const double score = validation_score(config.task, y_val, pred);
    rec.log.push_back({iteration, score, loss, elapsed(), skipped});
    if (iteration == 0 || score > rec.best_validation_score) {
      rec.best_iteration = iteration;
      rec.best_validation_score = score;
      rec.best_validation_predictions = std::move(pred);
      best = params;
    }
  };

  const double nan = std::numeric_limits<double>::quiet_NaN();
  evaluate(0, nan, false);

  AdamState adam = AdamState::zeros_like(params.tensors());
  for (std::size_t it = 1; it <= config.max_iter; ++it) {
    if (config.enforce_budget && elapsed() >= config.budget_seconds) {
      rec.budget_exhausted = true;
      break;
    }
    std::vector<std::size_t> rows = it == 1 ? std::move(first_rows) : schedule.next();
    if (observer) {
      std::vector<std::size_t> original(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) original[i] = rec.split.train[rows[i]];
      observer(it, original);
    }
    const Matrix x_b = select_rows(x_train, rows);
    const Matrix y_b = select_rows(y_train, rows);
    double loss = nan;
    bool skipped = false;
    try {
      Tape tape;
      const ParamNodes nodes = register_params(tape, params);
      const NodeId a = forward_hidden(tape, nodes, tape.constant(x_b), config.depth);
      NodeId root;
      if (config.head == HeadKind::Learned) {
        root = learned_head_loss(tape, a, *nodes.output, y_b, config.task);
      } else {
        const Matrix noise = structured_noise(batch, config.permutations, sigma_struct, noise_rng);
        const LossBatch lb = make_batch(config.task, y_b, perms, noise, sigma_label, &dither_rng);
        const NodeId lambda = tape.exp(nodes.log_lambda);
        root = config.task == TaskKind::Regression ? mlr_loss(tape, a, lambda, lb, config.ridge_form)
                                                   : bce_mlr_loss(tape, a, lambda, lb, config.ridge_form);
      }
      loss = tape.value(root).scalar_value();
      const autograd::GradientMap grads = tape.backward(root);
      adam_step(params, grads, adam, config.learning_rate);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteGradient && e.code() != ErrorCode::DegenerateClass) {
        throw Error(e.code(), "iteration " + std::to_string(it) + ": " + e.what());
      }
      skipped = true;
      ++rec.skipped_updates;
    }
    rec.iterations = it;
    try {
      evaluate(it, loss, skipped);
    } catch (const Error& e) {
      throw Error(e.code(), "validation at iteration " + std::to_string(it) + ": " + e.what());
    }
  }

  rec.final_lambda = best.lambda();
  TrainResult out;
  out.model = finalize_model(std::move(best), x_train, y_train, config.task, config.head, config.ridge_form);
  out.record = std::move(rec);
  return out;
}

}  // namespace mlr
