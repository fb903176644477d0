#include "mlr/autograd.hpp"

#include <algorithm>
#include <cmath>

namespace mlr::autograd {

namespace {

constexpr Real kSqrtFloor = Real(1e-12);

Real logistic(Real x) {
  if (x >= 0) return Real(1) / (Real(1) + std::exp(-x));
  const Real e = std::exp(x);
  return e / (Real(1) + e);
}

Real softplus_value(Real x) { return std::max(x, Real(0)) + std::log1p(std::exp(-std::abs(x))); }

Matrix map(const Matrix& x, auto&& f) {
  Matrix out = x;
  for (auto& v : out.flat()) v = f(v);
  return out;
}

void accumulate(Matrix& dst, const Matrix& src) {
  if (dst.empty()) {
    dst = src;
    return;
  }
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

bool GradientMap::all_finite() const {
  return std::all_of(grads_.begin(), grads_.end(), [](const Matrix& g) { return mlr::all_finite(g); });
}

NodeId Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

NodeId Tape::constant(Matrix value) {
  Node n;
  n.op = OpKind::Constant;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::parameter(Matrix value, std::size_t slot) {
  for (const auto& n : nodes_) {
    if (n.op == OpKind::Parameter && n.aux == slot) {
      throw Error(ErrorCode::InvalidConfig, "parameter slot registered twice");
    }
  }
  Node n;
  n.op = OpKind::Parameter;
  n.needs_grad = true;
  n.aux = slot;
  n.value = std::move(value);
  slot_count_ = std::max(slot_count_, slot + 1);
  return push(std::move(n));
}

NodeId Tape::unary(OpKind op, NodeId x, Matrix value) {
  Node n;
  n.op = op;
  n.lhs = x.index;
  n.needs_grad = at(x).needs_grad;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  Node n;
  n.op = OpKind::MatMul;
  n.lhs = a.index;
  n.rhs = b.index;
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  n.value = kernels::matmul(at(a).value, at(b).value);
  return push(std::move(n));
}

NodeId Tape::matmul_tn(NodeId a, NodeId b) {
  Node n;
  n.op = OpKind::MatMulTN;
  n.lhs = a.index;
  n.rhs = b.index;
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  n.value = kernels::matmul_tn(at(a).value, at(b).value);
  return push(std::move(n));
}

NodeId Tape::matmul_nt(NodeId a, NodeId b) {
  Node n;
  n.op = OpKind::MatMulNT;
  n.lhs = a.index;
  n.rhs = b.index;
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  n.value = kernels::matmul_nt(at(a).value, at(b).value);
  return push(std::move(n));
}

NodeId Tape::add_row_broadcast(NodeId x, NodeId bias) {
  const Matrix& xv = at(x).value;
  const Matrix& bv = at(bias).value;
  if (bv.rows() != 1 || bv.cols() != xv.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "bias " + bv.shape_string() + " for " + xv.shape_string());
  }
  Matrix out = xv;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += bv[j];
  }
  Node n;
  n.op = OpKind::AddRowBroadcast;
  n.lhs = x.index;
  n.rhs = bias.index;
  n.needs_grad = at(x).needs_grad || at(bias).needs_grad;
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::add_diag(NodeId m, NodeId s) {
  const Matrix& mv = at(m).value;
  if (mv.rows() != mv.cols()) throw Error(ErrorCode::ShapeMismatch, "add_diag needs a square matrix");
  const Real sv = at(s).value.scalar_value();
  Matrix out = mv;
  for (std::size_t i = 0; i < out.rows(); ++i) out(i, i) += sv;
  Node n;
  n.op = OpKind::AddDiag;
  n.lhs = m.index;
  n.rhs = s.index;
  n.needs_grad = at(m).needs_grad || at(s).needs_grad;
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::spd_solve(NodeId m, NodeId b) {
  auto factor = std::make_shared<const Cholesky>(Cholesky::factor(at(m).value));
  Node n;
  n.op = OpKind::SpdSolve;
  n.lhs = m.index;
  n.rhs = b.index;
  n.needs_grad = at(m).needs_grad || at(b).needs_grad;
  n.value = factor->solve(at(b).value);
  n.factor = std::move(factor);
  return push(std::move(n));
}

NodeId Tape::relu(NodeId x) {
  return unary(OpKind::Relu, x, map(at(x).value, [](Real v) { return v > 0 ? v : Real(0); }));
}

NodeId Tape::add(NodeId a, NodeId b) {
  Node n;
  n.op = OpKind::Add;
  n.lhs = a.index;
  n.rhs = b.index;
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  n.value = at(a).value + at(b).value;
  return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
  Node n;
  n.op = OpKind::Sub;
  n.lhs = a.index;
  n.rhs = b.index;
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  n.value = at(a).value - at(b).value;
  return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
  Node n;
  n.op = OpKind::Mul;
  n.lhs = a.index;
  n.rhs = b.index;
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  n.value = hadamard(at(a).value, at(b).value);
  return push(std::move(n));
}

NodeId Tape::scale(NodeId x, Real c) {
  NodeId id = unary(OpKind::Scale, x, c * at(x).value);
  nodes_.back().coef = c;
  return id;
}

NodeId Tape::add_scalar(NodeId x, Real c) {
  NodeId id = unary(OpKind::AddScalar, x, map(at(x).value, [c](Real v) { return v + c; }));
  nodes_.back().coef = c;
  return id;
}

NodeId Tape::exp(NodeId x) {
  return unary(OpKind::Exp, x, map(at(x).value, [](Real v) { return std::exp(v); }));
}

NodeId Tape::log(NodeId x) {
  return unary(OpKind::Log, x, map(at(x).value, [](Real v) { return std::log(v); }));
}

NodeId Tape::sqrt(NodeId x) {
  return unary(OpKind::Sqrt, x, map(at(x).value, [](Real v) { return std::sqrt(v); }));
}

NodeId Tape::square(NodeId x) {
  return unary(OpKind::Square, x, map(at(x).value, [](Real v) { return v * v; }));
}

NodeId Tape::abs(NodeId x) {
  return unary(OpKind::Abs, x, map(at(x).value, [](Real v) { return std::abs(v); }));
}

NodeId Tape::sigmoid(NodeId x) { return unary(OpKind::Sigmoid, x, map(at(x).value, logistic)); }

NodeId Tape::softplus(NodeId x) { return unary(OpKind::Softplus, x, map(at(x).value, softplus_value)); }

NodeId Tape::slice_cols(NodeId x, std::size_t start, std::size_t count) {
  const Matrix& xv = at(x).value;
  if (start + count > xv.cols()) throw Error(ErrorCode::ShapeMismatch, "column slice out of range");
  Matrix out(xv.rows(), count);
  for (std::size_t i = 0; i < xv.rows(); ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = xv(i, start + j);
  NodeId id = unary(OpKind::SliceCols, x, std::move(out));
  nodes_.back().aux = start;
  return id;
}

NodeId Tape::mean_rows(NodeId x) {
  const Matrix& xv = at(x).value;
  if (xv.rows() == 0) throw Error(ErrorCode::ShapeMismatch, "mean over zero rows");
  Matrix out(1, xv.cols());
  for (std::size_t i = 0; i < xv.rows(); ++i)
    for (std::size_t j = 0; j < xv.cols(); ++j) out[j] += xv(i, j);
  const auto n = static_cast<Real>(xv.rows());
  for (auto& v : out.flat()) v /= n;
  return unary(OpKind::MeanRows, x, std::move(out));
}

NodeId Tape::mean(NodeId x) {
  const Matrix& xv = at(x).value;
  if (xv.empty()) throw Error(ErrorCode::ShapeMismatch, "mean of empty matrix");
  Real s = 0;
  for (Real v : xv.flat()) s += v;
  return unary(OpKind::Mean, x, Matrix::scalar(s / static_cast<Real>(xv.size())));
}

NodeId Tape::sum(NodeId x) {
  Real s = 0;
  for (Real v : at(x).value.flat()) s += v;
  return unary(OpKind::Sum, x, Matrix::scalar(s));
}

GradientMap Tape::backward(NodeId root) const {
  const Node& r = at(root);
  if (r.value.rows() != 1 || r.value.cols() != 1) {
    throw Error(ErrorCode::NonScalarRoot, "backward root is " + r.value.shape_string());
  }
  std::vector<Matrix> adj(root.index + 1);
  adj[root.index] = Matrix::scalar(1);

  auto send = [&](std::uint32_t to, Matrix g) {
    if (nodes_[to].needs_grad) accumulate(adj[to], g);
  };

  for (std::size_t idx = root.index + 1; idx-- > 0;) {
    const Node& n = nodes_[idx];
    if (!n.needs_grad || adj[idx].empty()) continue;
    const Matrix& g = adj[idx];
    const Node& a = nodes_[n.lhs];
    const Node& b = nodes_[n.rhs];
    switch (n.op) {
      case OpKind::Constant:
      case OpKind::Parameter:
        break;
      case OpKind::MatMul:
        if (a.needs_grad) send(n.lhs, kernels::matmul_nt(g, b.value));
        if (b.needs_grad) send(n.rhs, kernels::matmul_tn(a.value, g));
        break;
      case OpKind::MatMulTN:
        if (a.needs_grad) send(n.lhs, kernels::matmul_nt(b.value, g));
        if (b.needs_grad) send(n.rhs, kernels::matmul(a.value, g));
        break;
      case OpKind::MatMulNT:
        if (a.needs_grad) send(n.lhs, kernels::matmul(g, b.value));
        if (b.needs_grad) send(n.rhs, kernels::matmul_tn(g, a.value));
        break;
      case OpKind::AddRowBroadcast: {
        send(n.lhs, g);
        if (b.needs_grad) {
          Matrix gb(1, g.cols());
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) gb[j] += g(i, j);
          send(n.rhs, std::move(gb));
        }
        break;
      }
      case OpKind::AddDiag:
        send(n.lhs, g);
        if (b.needs_grad) send(n.rhs, Matrix::scalar(static_cast<Real>(trace(g))));
        break;
      case OpKind::SpdSolve: {
        // X = M^{-1} B:  B_bar = M^{-1} X_bar,  M_bar = -sym(B_bar X^T).
        Matrix gb = n.factor->solve(g);
        if (a.needs_grad) {
          Matrix gm = kernels::matmul_nt(gb, n.value);
          Matrix sym(gm.rows(), gm.cols());
          for (std::size_t i = 0; i < gm.rows(); ++i)
            for (std::size_t j = 0; j < gm.cols(); ++j) sym(i, j) = Real(-0.5) * (gm(i, j) + gm(j, i));
          send(n.lhs, std::move(sym));
        }
        if (b.needs_grad) send(n.rhs, std::move(gb));
        break;
      }
      case OpKind::Relu: {
        Matrix gx = g;
        for (std::size_t i = 0; i < gx.size(); ++i)
          if (!(a.value[i] > 0)) gx[i] = 0;
        send(n.lhs, std::move(gx));
        break;
      }
      case OpKind::Add:
        send(n.lhs, g);
        send(n.rhs, g);
        break;
      case OpKind::Sub:
        send(n.lhs, g);
        if (b.needs_grad) send(n.rhs, Real(-1) * g);
        break;
      case OpKind::Mul:
        if (a.needs_grad) send(n.lhs, hadamard(g, b.value));
        if (b.needs_grad) send(n.rhs, hadamard(g, a.value));
        break;
      case OpKind::Scale:
        send(n.lhs, n.coef * g);
        break;
      case OpKind::AddScalar:
        send(n.lhs, g);
        break;
      case OpKind::Exp:
        send(n.lhs, hadamard(g, n.value));
        break;
      case OpKind::Log: {
        Matrix gx = g;
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] /= a.value[i];
        send(n.lhs, std::move(gx));
        break;
      }
      case OpKind::Sqrt: {
        Matrix gx = g;
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] /= Real(2) * std::max(n.value[i], kSqrtFloor);
        send(n.lhs, std::move(gx));
        break;
      }
      case OpKind::Square: {
        Matrix gx = g;
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= Real(2) * a.value[i];
        send(n.lhs, std::move(gx));
        break;
      }
      case OpKind::Abs: {
        Matrix gx = g;
        for (std::size_t i = 0; i < gx.size(); ++i) {
          const Real v = a.value[i];
          gx[i] *= v > 0 ? Real(1) : (v < 0 ? Real(-1) : Real(0));
        }
        send(n.lhs, std::move(gx));
        break;
      }
      case OpKind::Sigmoid: {
        Matrix gx = g;
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= n.value[i] * (Real(1) - n.value[i]);
        send(n.lhs, std::move(gx));
        break;
      }
      case OpKind::Softplus: {
        Matrix gx = g;
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= logistic(a.value[i]);
        send(n.lhs, std::move(gx));
        break;
      }
      case OpKind::SliceCols: {
        Matrix gx(a.value.rows(), a.value.cols());
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) gx(i, n.aux + j) = g(i, j);
        send(n.lhs, std::move(gx));
        break;
      }
      case OpKind::MeanRows: {
        Matrix gx(a.value.rows(), a.value.cols());
        const Real inv = Real(1) / static_cast<Real>(a.value.rows());
        for (std::size_t i = 0; i < gx.rows(); ++i)
          for (std::size_t j = 0; j < gx.cols(); ++j) gx(i, j) = g[j] * inv;
        send(n.lhs, std::move(gx));
        break;
      }
      case OpKind::Mean:
        send(n.lhs, Matrix(a.value.rows(), a.value.cols(), g[0] / static_cast<Real>(a.value.size())));
        break;
      case OpKind::Sum:
        send(n.lhs, Matrix(a.value.rows(), a.value.cols(), g[0]));
        break;
    }
  }

  std::vector<Matrix> grads(slot_count_);
  std::vector<bool> seen(slot_count_, false);
  for (std::size_t idx = 0; idx < nodes_.size(); ++idx) {
    const Node& n = nodes_[idx];
    if (n.op != OpKind::Parameter) continue;
    seen[n.aux] = true;
    if (idx < adj.size() && !adj[idx].empty()) {
      grads[n.aux] = adj[idx];
    } else {
      grads[n.aux] = Matrix(n.value.rows(), n.value.cols());
    }
  }
  for (std::size_t s = 0; s < slot_count_; ++s) {
    if (!seen[s]) throw Error(ErrorCode::InvalidConfig, "parameter slots must be contiguous");
  }
  GradientMap out(std::move(grads));
  if (!out.all_finite()) throw Error(ErrorCode::NonFiniteGradient, "gradient contains NaN or Inf");
  return out;
}

GradCheckResult grad_check(const LossBuilder& build, const std::vector<Matrix>& params, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw Error(ErrorCode::InvalidConfig, "grad_check step must lie in [1e-7, 1e-3]");

  auto evaluate = [&](const std::vector<Matrix>& values) {
    Tape tape;
    std::vector<NodeId> ids;
    ids.reserve(values.size());
    for (std::size_t s = 0; s < values.size(); ++s) ids.push_back(tape.parameter(values[s], s));
    const NodeId root = build(tape, ids);
    return std::pair<Tape, NodeId>(std::move(tape), root);
  };

  auto [tape, root] = evaluate(params);
  const GradientMap analytic = tape.backward(root);

  GradCheckResult result;
  std::vector<Matrix> probe = params;
  for (std::size_t s = 0; s < params.size(); ++s) {
    for (std::size_t e = 0; e < params[s].size(); ++e) {
      const Real original = params[s][e];
      probe[s][e] = original + static_cast<Real>(eps);
      auto [tp, rp] = evaluate(probe);
      const double up = tp.value(rp).scalar_value();
      probe[s][e] = original - static_cast<Real>(eps);
      auto [tm, rm] = evaluate(probe);
      const double down = tm.value(rm).scalar_value();
      probe[s][e] = original;

      const double fd = (up - down) / (2 * eps);
      const double ad = analytic[s][e];
      const double err = std::abs(ad - fd) / std::max({1.0, std::abs(ad), std::abs(fd)});
      if (err > result.max_rel_error) result = {err, s, e};
    }
  }
  return result;
}

}  // namespace mlr::autograd
