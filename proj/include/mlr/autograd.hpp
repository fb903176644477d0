#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "mlr/linalg.hpp"
#include "mlr/matrix.hpp"

// Reverse-mode differentiation over the handful of matrix primitives the MLR
// forward pass needs. A Tape records nodes in topological order as they are
// created; backward() walks them once in reverse.
namespace mlr::autograd {

struct NodeId {
  std::uint32_t index = 0;
};

enum class OpKind : std::uint8_t {
  Constant,
  Parameter,
  MatMul,           // A B
  MatMulTN,         // A^T B
  MatMulNT,         // A B^T
  AddRowBroadcast,  // X + 1_n (x) b
  AddDiag,          // M + s I, s a 1x1 node
  SpdSolve,         // M^{-1} B
  Relu,
  Add,
  Sub,
  Mul,
  Scale,      // c X, c a constant
  AddScalar,  // X + c, c a constant
  Exp,
  Log,
  Sqrt,
  Square,
  Abs,
  Sigmoid,
  Softplus,
  SliceCols,
  MeanRows,  // 1 x k column means
  Mean,      // 1 x 1
  Sum,       // 1 x 1
};

/// Gradients indexed by parameter slot; shapes match the registered values.
class GradientMap {
 public:
  GradientMap() = default;
  explicit GradientMap(std::vector<Matrix> grads) : grads_(std::move(grads)) {}

  std::size_t size() const noexcept { return grads_.size(); }
  const Matrix& operator[](std::size_t slot) const { return grads_.at(slot); }
  std::span<const Matrix> all() const noexcept { return grads_; }
  bool all_finite() const;

  bool operator==(const GradientMap&) const = default;

 private:
  std::vector<Matrix> grads_;
};

class Tape {
 public:
  NodeId constant(Matrix value);
  /// Registers a trainable leaf. Slots must be unique within a tape.
  NodeId parameter(Matrix value, std::size_t slot);

  NodeId matmul(NodeId a, NodeId b);
  NodeId matmul_tn(NodeId a, NodeId b);
  NodeId matmul_nt(NodeId a, NodeId b);
  NodeId add_row_broadcast(NodeId x, NodeId bias);
  NodeId add_diag(NodeId m, NodeId s);
  NodeId spd_solve(NodeId m, NodeId b);
  NodeId relu(NodeId x);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId x, Real c);
  NodeId add_scalar(NodeId x, Real c);
  NodeId exp(NodeId x);
  NodeId log(NodeId x);
  NodeId sqrt(NodeId x);
  NodeId square(NodeId x);
  NodeId abs(NodeId x);
  NodeId sigmoid(NodeId x);
  NodeId softplus(NodeId x);
  NodeId slice_cols(NodeId x, std::size_t start, std::size_t count);
  NodeId mean_rows(NodeId x);
  NodeId mean(NodeId x);
  NodeId sum(NodeId x);

  const Matrix& value(NodeId id) const { return nodes_.at(id.index).value; }
  OpKind kind(NodeId id) const { return nodes_.at(id.index).op; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Exact reverse-mode gradients of a 1x1 root with respect to every
  /// registered parameter. Throws NonScalarRoot or NonFiniteGradient.
  GradientMap backward(NodeId root) const;

 private:
  struct Node {
    OpKind op = OpKind::Constant;
    std::uint32_t lhs = 0;
    std::uint32_t rhs = 0;
    bool needs_grad = false;
    Real coef = 0;           // Scale / AddScalar
    std::size_t aux = 0;     // parameter slot, slice start
    std::shared_ptr<const Cholesky> factor;
    Matrix value;
  };

  NodeId push(Node node);
  const Node& at(NodeId id) const { return nodes_.at(id.index); }
  NodeId unary(OpKind op, NodeId x, Matrix value);

  std::vector<Node> nodes_;
  std::size_t slot_count_ = 0;
};

struct GradCheckResult {
  double max_rel_error = 0;
  std::size_t worst_slot = 0;
  std::size_t worst_entry = 0;
};

/// Builds a scalar loss on the tape from the given parameter nodes.
using LossBuilder = std::function<NodeId(Tape&, std::span<const NodeId>)>;

/// Compares reverse-mode gradients with central differences of step eps over
/// every parameter entry. Error per entry is |g_ad - g_fd| / max(1, |g_ad|, |g_fd|).
GradCheckResult grad_check(const LossBuilder& build, const std::vector<Matrix>& params, double eps);

}  // namespace mlr::autograd
