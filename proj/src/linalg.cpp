#include "mlr/linalg.hpp"

#include <cmath>

namespace mlr {

namespace {

// Four independent partial sums keep the dot product vectorizable while the
// summation order stays fixed.
inline Real dot(const Real* x, const Real* y, std::size_t n) {
  Real s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += x[i] * y[i];
    s1 += x[i + 1] * y[i + 1];
    s2 += x[i + 2] * y[i + 2];
    s3 += x[i + 3] * y[i + 3];
  }
  for (; i < n; ++i) s0 += x[i] * y[i];
  return (s0 + s1) + (s2 + s3);
}

void check_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::ShapeMismatch, "spd matrix must be square, got " + m.shape_string());
  const double tol = 1e-8 * std::max(1.0, frobenius_norm(m));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(static_cast<double>(m(i, j)) - m(j, i)) > tol)
        throw Error(ErrorCode::NotPositiveDefinite, "matrix is not symmetric");
}

}  // namespace

bool Cholesky::try_factor(const Matrix& m, Real shift, Matrix& lower) {
  const std::size_t n = m.rows();
  lower = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    Real* li = lower.data() + i * n;
    for (std::size_t j = 0; j < i; ++j) {
      const Real* lj = lower.data() + j * n;
      li[j] = (m(i, j) - dot(li, lj, j)) / lj[j];
    }
    const Real d = m(i, i) + shift - dot(li, li, i);
    if (!(d > 0) || !std::isfinite(d)) return false;
    li[i] = std::sqrt(d);
  }
  return true;
}

Cholesky Cholesky::factor(const Matrix& m) {
  check_symmetric(m);
  Cholesky c;
  if (try_factor(m, 0, c.lower_)) return c;
  const Real shift = static_cast<Real>(1e-10 * trace(m) / static_cast<double>(m.rows()));
  if (shift > 0 && try_factor(m, shift, c.lower_)) {
    c.jitter_ = shift;
    return c;
  }
  throw Error(ErrorCode::NotPositiveDefinite,
              "factorization of " + m.shape_string() + " failed after jitter retry (lambda too small or degenerate activations)");
}

Matrix Cholesky::solve(const Matrix& b) const {
  const std::size_t n = dim();
  if (b.rows() != n) throw Error(ErrorCode::ShapeMismatch, "solve rhs " + b.shape_string() + " for dim " + std::to_string(n));
  const std::size_t k = b.cols();
  Matrix x = b;
  // L y = b, row by row so the inner update runs along contiguous rhs rows.
  for (std::size_t i = 0; i < n; ++i) {
    Real* xi = x.data() + i * k;
    const Real* li = lower_.data() + i * n;
    for (std::size_t p = 0; p < i; ++p) {
      const Real l = li[p];
      if (l == Real(0)) continue;
      const Real* xp = x.data() + p * k;
      for (std::size_t j = 0; j < k; ++j) xi[j] -= l * xp[j];
    }
    const Real inv = Real(1) / li[i];
    for (std::size_t j = 0; j < k; ++j) xi[j] *= inv;
  }
  // L^T x = y
  for (std::size_t ii = n; ii-- > 0;) {
    Real* xi = x.data() + ii * k;
    for (std::size_t p = ii + 1; p < n; ++p) {
      const Real l = lower_(p, ii);
      if (l == Real(0)) continue;
      const Real* xp = x.data() + p * k;
      for (std::size_t j = 0; j < k; ++j) xi[j] -= l * xp[j];
    }
    const Real inv = Real(1) / lower_(ii, ii);
    for (std::size_t j = 0; j < k; ++j) xi[j] *= inv;
  }
  return x;
}

Matrix spd_solve(const Matrix& m, const Matrix& b) { return Cholesky::factor(m).solve(b); }

RidgeForm resolve_form(RidgeForm form, std::size_t n, std::size_t width) {
  if (form != RidgeForm::Auto) return form;
  return n < width ? RidgeForm::Kernel : RidgeForm::Gram;
}

namespace {

Matrix shifted(Matrix m, Real lambda) {
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += lambda;
  return m;
}

}  // namespace

RidgeProjector ridge_projector(const Matrix& a, Real lambda, RidgeForm form) {
  if (!(lambda > 0)) throw Error(ErrorCode::InvalidConfig, "ridge lambda must be positive");
  if (a.rows() == 0 || a.cols() == 0) throw Error(ErrorCode::ShapeMismatch, "empty activation matrix");
  RidgeProjector out;
  if (resolve_form(form, a.rows(), a.cols()) == RidgeForm::Gram) {
    const Cholesky chol = Cholesky::factor(shifted(kernels::matmul_tn(a, a), lambda));
    out.projection = chol.solve(transpose(a));
  } else {
    const Cholesky chol = Cholesky::factor(shifted(kernels::matmul_nt(a, a), lambda));
    // P = A^T (K + lambda I)^{-1}; K + lambda I is symmetric so P^T = (K + lambda I)^{-1} A.
    out.projection = transpose(chol.solve(a));
  }
  out.hat = kernels::matmul(a, out.projection);
  return out;
}

Matrix ridge_weights(const Matrix& a, Real lambda, const Matrix& y, RidgeForm form) {
  if (!(lambda > 0)) throw Error(ErrorCode::InvalidConfig, "ridge lambda must be positive");
  if (y.rows() != a.rows()) throw Error(ErrorCode::ShapeMismatch, "ridge targets " + y.shape_string() + " for activations " + a.shape_string());
  if (resolve_form(form, a.rows(), a.cols()) == RidgeForm::Gram) {
    const Cholesky chol = Cholesky::factor(shifted(kernels::matmul_tn(a, a), lambda));
    return chol.solve(kernels::matmul_tn(a, y));
  }
  const Cholesky chol = Cholesky::factor(shifted(kernels::matmul_nt(a, a), lambda));
  return kernels::matmul_tn(a, chol.solve(y));
}

}  // namespace mlr
