#include "mlr/kernels.hpp"

namespace mlr::kernels::serial {

namespace {

std::size_t rows_of(Op op, const Matrix& m) { return op == Op::N ? m.rows() : m.cols(); }
std::size_t cols_of(Op op, const Matrix& m) { return op == Op::N ? m.cols() : m.rows(); }
Real at(Op op, const Matrix& m, std::size_t r, std::size_t c) {
  return op == Op::N ? m(r, c) : m(c, r);
}

}  // namespace

void gemm(Op op_a, Op op_b, const Matrix& a, const Matrix& b, Matrix& c) {
  const std::size_t m = rows_of(op_a, a);
  const std::size_t k = cols_of(op_a, a);
  const std::size_t n = cols_of(op_b, b);
  if (rows_of(op_b, b) != k) {
    throw Error(ErrorCode::ShapeMismatch, "gemm inner dimensions " + a.shape_string() + " / " + b.shape_string());
  }
  c = Matrix(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Real sum = 0;
      for (std::size_t p = 0; p < k; ++p) sum += at(op_a, a, i, p) * at(op_b, b, p, j);
      c(i, j) = sum;
    }
  }
}

}  // namespace mlr::kernels::serial
