#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mlr/model.hpp"

namespace mlr {

using autograd::NodeId;
using autograd::Tape;

MlrConfig MlrConfig::for_depth(int depth, TaskKind task) {
  MlrConfig c;
  c.task = task;
  c.label_dither = task == TaskKind::Regression ? 0.03 : 0.0;
  c.apply_depth_defaults(depth);
  return c;
}

void MlrConfig::apply_depth_defaults(int new_depth) {
  depth = new_depth;
  switch (depth) {
    case 1: learning_rate = 1e-2; max_iter = 200; break;
    case 2: learning_rate = 1e-3; max_iter = 200; break;
    case 3: learning_rate = std::pow(10.0, -3.5); max_iter = 400; break;
    case 4: learning_rate = 1e-4; max_iter = 400; break;
    default: throw Error(ErrorCode::InvalidConfig, "depth must be in {1,2,3,4}, got " + std::to_string(depth));
  }
}

void MlrConfig::validate() const {
  if (depth < 1 || depth > 4) throw Error(ErrorCode::InvalidConfig, "depth must be in {1,2,3,4}, got " + std::to_string(depth));
  if (width < 1) throw Error(ErrorCode::InvalidConfig, "width must be at least 1");
  if (label_dither < 0 || struct_dither < 0) throw Error(ErrorCode::InvalidConfig, "dither scales must be non-negative");
  if (!(learning_rate > 0)) throw Error(ErrorCode::InvalidConfig, "learning rate must be positive");
  if (batch_size && *batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch size must be at least 1");
  if (!(validation_fraction > 0 && validation_fraction < 1)) throw Error(ErrorCode::InvalidConfig, "validation fraction must lie in (0, 1)");
  if (lambda_init && !(*lambda_init > 0)) throw Error(ErrorCode::InvalidConfig, "lambda_init must be positive");
  if (head == HeadKind::Learned && depth < 2) throw Error(ErrorCode::InvalidConfig, "a learned head needs at least one hidden layer");
}

std::size_t ModelParams::slot_count() const {
  return weights.size() + biases.size() + (output.empty() ? 0 : 1) + 1;
}

std::vector<Matrix> ModelParams::tensors() const {
  std::vector<Matrix> out;
  out.reserve(slot_count());
  out.insert(out.end(), weights.begin(), weights.end());
  out.insert(out.end(), biases.begin(), biases.end());
  if (!output.empty()) out.push_back(output);
  out.push_back(Matrix::scalar(log_lambda));
  return out;
}

void ModelParams::assign(std::span<const Matrix> tensors) {
  if (tensors.size() != slot_count()) throw Error(ErrorCode::ShapeMismatch, "parameter count mismatch");
  std::size_t s = 0;
  for (auto& w : weights) { require_same_shape(w, tensors[s], "assign weight"); w = tensors[s++]; }
  for (auto& b : biases) { require_same_shape(b, tensors[s], "assign bias"); b = tensors[s++]; }
  if (!output.empty()) { require_same_shape(output, tensors[s], "assign output"); output = tensors[s++]; }
  log_lambda = tensors[s].scalar_value();
}

std::vector<std::span<Real>> ModelParams::views() {
  std::vector<std::span<Real>> out;
  out.reserve(slot_count());
  for (auto& w : weights) out.push_back(w.flat());
  for (auto& b : biases) out.push_back(b.flat());
  if (!output.empty()) out.push_back(output.flat());
  out.emplace_back(&log_lambda, 1);
  return out;
}

ModelParams init_weights(std::size_t input_dim, std::size_t width, int depth, std::uint64_t seed, HeadKind head) {
  if (depth < 1 || depth > 4) throw Error(ErrorCode::InvalidConfig, "depth must be in {1,2,3,4}");
  if (input_dim == 0 || width == 0) throw Error(ErrorCode::InvalidConfig, "input and width must be positive");
  Rng rng(seed);
  ModelParams p;
  p.input_dim = input_dim;
  p.width = width;
  p.depth = depth;
  for (int l = 1; l <= depth - 1; ++l) {
    const std::size_t fan_in = l == 1 ? input_dim : width;
    const Real bound = static_cast<Real>(std::sqrt(6.0 / static_cast<double>(fan_in + width)));
    Matrix w(fan_in, width);
    for (auto& v : w.flat()) v = rng.uniform(-bound, bound);
    p.weights.push_back(std::move(w));
    p.biases.emplace_back(1, width);
  }
  if (head == HeadKind::Learned) {
    // The bound uses the input dimension d, not the layer's fan-in J.
    const std::size_t fan_in = p.feature_width();
    const Real bound = static_cast<Real>(std::sqrt(6.0 / static_cast<double>(input_dim + 1)));
    p.output = Matrix(fan_in, 1);
    for (auto& v : p.output.flat()) v = rng.uniform(-bound, bound);
  }
  return p;
}

namespace {

void add_bias_relu(Matrix& z, const Matrix& bias) {
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto r = z.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias[j];
  }
  for (auto& v : z.flat()) v = v > 0 ? v : Real(0);
}

}  // namespace

Matrix forward_hidden(const ModelParams& params, const Matrix& x) {
  if (x.cols() != params.input_dim) {
    throw Error(ErrorCode::ShapeMismatch, "input has " + std::to_string(x.cols()) + " columns, model expects " +
                                              std::to_string(params.input_dim));
  }
  Matrix a = x;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    a = kernels::matmul(a, params.weights[l]);
    add_bias_relu(a, params.biases[l]);
  }
  return a;
}

ParamNodes register_params(Tape& tape, const ModelParams& params) {
  ParamNodes nodes;
  std::size_t slot = 0;
  for (const auto& w : params.weights) nodes.weights.push_back(tape.parameter(w, slot++));
  for (const auto& b : params.biases) nodes.biases.push_back(tape.parameter(b, slot++));
  if (!params.output.empty()) nodes.output = tape.parameter(params.output, slot++);
  nodes.log_lambda = tape.parameter(Matrix::scalar(params.log_lambda), slot++);
  return nodes;
}

NodeId forward_hidden(Tape& tape, const ParamNodes& nodes, NodeId x, int depth) {
  if (nodes.weights.size() != static_cast<std::size_t>(depth - 1)) {
    throw Error(ErrorCode::ShapeMismatch, "parameter nodes do not match depth");
  }
  NodeId a = x;
  for (std::size_t l = 0; l < nodes.weights.size(); ++l) {
    a = tape.relu(tape.add_row_broadcast(tape.matmul(a, nodes.weights[l]), nodes.biases[l]));
  }
  return a;
}

Matrix PermutationSet::apply(std::size_t t, const Matrix& y) const {
  const auto& p = perms.at(t);
  if (y.rows() != p.size()) throw Error(ErrorCode::ShapeMismatch, "permutation size does not match labels");
  Matrix out(y.rows(), y.cols());
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto src = y.row(p[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

PermutationSet sample_permutations(std::size_t n, std::size_t count, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidConfig, "cannot permute zero labels");
  PermutationSet set;
  set.n = n;
  set.seed = seed;
  Rng rng(seed);
  set.perms.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) std::swap(p[i], p[rng.index(i + 1)]);
    set.perms.push_back(std::move(p));
  }
  return set;
}

std::vector<std::size_t> invert_permutation(std::span<const std::size_t> perm) {
  std::vector<std::size_t> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
  return inv;
}

std::vector<Real> lambda_grid() {
  std::vector<Real> grid(12);
  for (int k = 0; k <= 11; ++k) grid[k] = static_cast<Real>(0.1 * std::pow(10.0, 5.0 * k / 11.0));
  return grid;
}

LambdaInit init_lambda(const Matrix& activations, const LossBatch& batch, TaskKind task,
                       std::span<const Real> grid, RidgeForm form) {
  if (grid.size() < 2) throw Error(ErrorCode::InvalidConfig, "lambda grid needs at least two points");
  LambdaInit out;
  out.losses.reserve(grid.size());
  for (Real lam : grid) out.losses.push_back(task_loss(task, activations, lam, batch, form));
  Real best = -std::numeric_limits<Real>::infinity();
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const Real diff = out.losses[k + 1] - out.losses[k];
    if (diff > best) {
      best = diff;
      out.k_hat = k;
    }
  }
  const Real lam = std::sqrt(grid[out.k_hat] * grid[out.k_hat + 1]);
  out.lambda = std::clamp(lam, grid.front(), grid.back());
  return out;
}

Real logistic(Real x) {
  if (x >= 0) return Real(1) / (Real(1) + std::exp(-x));
  const Real e = std::exp(x);
  return e / (Real(1) + e);
}

std::vector<int> hardmax_label(std::span<const Real> scores) {
  std::vector<int> labels(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) labels[i] = scores[i] > 0 ? 1 : 0;
  return labels;
}

Matrix TrainedModel::predict(const Matrix& x) const {
  if (!finalized) throw Error(ErrorCode::NotFinalized, "model has no cached output weights");
  return kernels::matmul(forward_hidden(params, x), output_weights);
}

TrainedModel finalize_model(ModelParams params, const Matrix& x_train, const Matrix& y_train, TaskKind task,
                            HeadKind head, RidgeForm form) {
  TrainedModel m;
  m.task = task;
  m.head = head;
  if (head == HeadKind::Learned) {
    m.output_weights = params.output;
  } else {
    Matrix targets = y_train;
    if (task == TaskKind::Classification) {
      for (auto& v : targets.flat()) v = 2 * v - 1;
    }
    m.output_weights = ridge_weights(forward_hidden(params, x_train), params.lambda(), targets, form);
  }
  m.params = std::move(params);
  m.finalized = true;
  return m;
}

}  // namespace mlr
