#pragma once

#include "mlr/kernels.hpp"
#include "mlr/matrix.hpp"

namespace mlr {

/// Lower-triangular factor of a symmetric positive-definite matrix, reusable
/// across right-hand sides.
class Cholesky {
 public:
  /// Factors m. On failure retries once with 1e-10 * trace(m) / dim added to
  /// the diagonal, then throws NotPositiveDefinite.
  static Cholesky factor(const Matrix& m);

  /// X with M X = B.
  Matrix solve(const Matrix& b) const;

  std::size_t dim() const noexcept { return lower_.rows(); }
  Real jitter() const noexcept { return jitter_; }
  const Matrix& lower() const noexcept { return lower_; }

 private:
  static bool try_factor(const Matrix& m, Real shift, Matrix& lower);

  Matrix lower_;
  Real jitter_ = 0;
};

Matrix spd_solve(const Matrix& m, const Matrix& b);

/// Which of the two algebraically equal ridge forms to evaluate.
///   Gram:   (A^T A + lambda I_J)^{-1} A^T
///   Kernel: A^T (A A^T + lambda I_n)^{-1}
/// Auto picks Kernel when the batch is smaller than the width.
enum class RidgeForm { Auto, Gram, Kernel };

RidgeForm resolve_form(RidgeForm form, std::size_t n, std::size_t width);

struct RidgeProjector {
  Matrix projection;  // P, J x n
  Matrix hat;         // H = A P, n x n
};

RidgeProjector ridge_projector(const Matrix& a, Real lambda, RidgeForm form = RidgeForm::Gram);

/// Output weights P * Y without forming H (J x k).
Matrix ridge_weights(const Matrix& a, Real lambda, const Matrix& y, RidgeForm form = RidgeForm::Auto);

}  // namespace mlr
