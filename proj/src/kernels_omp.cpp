#include <algorithm>

#include "mlr/kernels.hpp"

#ifdef MLR_HAVE_OPENMP
#include <omp.h>
#endif

namespace mlr::kernels {

namespace {

constexpr std::size_t kBlockK = 128;
constexpr std::size_t kBlockJ = 256;
// Below this many multiply-adds a parallel region costs more than it saves.
constexpr double kParallelFlops = 2.0e6;

constexpr std::size_t kTileRows = 4;
constexpr std::size_t kTileCols = 16;

// Left operand element (i, p): a[i * ld + p] for A, a[p * ld + i] for A^T, so
// one kernel serves both without copying.
template <bool Trans>
struct LeftView {
  const Real* a;
  std::size_t ld;
  Real operator()(std::size_t i, std::size_t p) const { return Trans ? a[p * ld + i] : a[i * ld + p]; }
};

// One 4 x 16 tile of C accumulated over p in [k0, k1). Each entry is summed in
// increasing p, the same order as the scalar loop.
template <bool Trans>
inline void tile_4x16(LeftView<Trans> a, std::size_t i0, const Real* bp, std::size_t ldb, Real* cp, std::size_t ldc,
                      std::size_t k0, std::size_t k1) {
  Real acc[kTileRows][kTileCols];
  for (std::size_t r = 0; r < kTileRows; ++r) {
    for (std::size_t j = 0; j < kTileCols; ++j) acc[r][j] = cp[r * ldc + j];
  }
  for (std::size_t p = k0; p < k1; ++p) {
    const Real* brow = bp + p * ldb;
    const Real a0 = a(i0, p);
    const Real a1 = a(i0 + 1, p);
    const Real a2 = a(i0 + 2, p);
    const Real a3 = a(i0 + 3, p);
    for (std::size_t j = 0; j < kTileCols; ++j) {
      const Real bv = brow[j];
      acc[0][j] += a0 * bv;
      acc[1][j] += a1 * bv;
      acc[2][j] += a2 * bv;
      acc[3][j] += a3 * bv;
    }
  }
  for (std::size_t r = 0; r < kTileRows; ++r) {
    for (std::size_t j = 0; j < kTileCols; ++j) cp[r * ldc + j] = acc[r][j];
  }
}

// C (m x n) = op(A) (m x k) * B (k x n), B row-major and untransposed.
template <bool Trans>
void gemm_view(LeftView<Trans> a, std::size_t m, std::size_t k, const Matrix& b, Matrix& c) {
  const std::size_t n = b.cols();
  c = Matrix(m, n);
  const Real* bp = b.data();
  Real* cp = c.data();
  const int threads = planned_threads(m, n, k);
  (void)threads;
  const auto row_blocks = static_cast<std::ptrdiff_t>((m + kTileRows - 1) / kTileRows);

  for (std::size_t k0 = 0; k0 < k; k0 += kBlockK) {
    const std::size_t k1 = std::min(k, k0 + kBlockK);
    for (std::size_t j0 = 0; j0 < n; j0 += kBlockJ) {
      const std::size_t j1 = std::min(n, j0 + kBlockJ);
#ifdef MLR_HAVE_OPENMP
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
#endif
      for (std::ptrdiff_t ib = 0; ib < row_blocks; ++ib) {
        const std::size_t i0 = static_cast<std::size_t>(ib) * kTileRows;
        const std::size_t rows = std::min(kTileRows, m - i0);
        std::size_t j = j0;
        if (rows == kTileRows) {
          for (; j + kTileCols <= j1; j += kTileCols) tile_4x16(a, i0, bp + j, n, cp + i0 * n + j, n, k0, k1);
        }
        // Ragged edge: plain i-k-j over what the tiles did not cover.
        for (std::size_t i = i0; i < i0 + rows; ++i) {
          Real* crow = cp + i * n;
          for (std::size_t p = k0; p < k1; ++p) {
            const Real av = a(i, p);
            if (av == Real(0)) continue;
            const Real* brow = bp + p * n;
            for (std::size_t jj = j; jj < j1; ++jj) crow[jj] += av * brow[jj];
          }
        }
      }
    }
  }
}

// c = A v and c = A^T v for a single right-hand column, without the transpose.
void gemv(const Matrix& a, const Matrix& v, Matrix& c) {
  const std::size_t m = a.rows();
  const std::size_t k = a.cols();
  c = Matrix(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    const Real* arow = a.data() + i * k;
    Real s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    std::size_t p = 0;
    for (; p + 4 <= k; p += 4) {
      s0 += arow[p] * v[p];
      s1 += arow[p + 1] * v[p + 1];
      s2 += arow[p + 2] * v[p + 2];
      s3 += arow[p + 3] * v[p + 3];
    }
    for (; p < k; ++p) s0 += arow[p] * v[p];
    c[i] = (s0 + s1) + (s2 + s3);
  }
}

void gemv_t(const Matrix& a, const Matrix& v, Matrix& c) {
  const std::size_t m = a.rows();
  const std::size_t k = a.cols();
  c = Matrix(k, 1);
  Real* cp = c.data();
  for (std::size_t i = 0; i < m; ++i) {
    const Real vi = v[i];
    if (vi == Real(0)) continue;
    const Real* arow = a.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) cp[p] += vi * arow[p];
  }
}

}  // namespace

int planned_threads(std::size_t m, std::size_t n, std::size_t k) {
#ifdef MLR_HAVE_OPENMP
  if (omp_in_parallel()) return 1;
  const double flops = static_cast<double>(m) * static_cast<double>(n) * static_cast<double>(k);
  if (flops < kParallelFlops || m < 2) return 1;
  return std::max(1, std::min<int>(omp_get_max_threads(), static_cast<int>(m)));
#else
  (void)m; (void)n; (void)k;
  return 1;
#endif
}

namespace blocked {

void gemm(Op op_a, Op op_b, const Matrix& a, const Matrix& b, Matrix& c) {
  if (op_b == Op::N && b.cols() == 1) {
    const std::size_t inner = op_a == Op::N ? a.cols() : a.rows();
    if (inner != b.rows()) {
      throw Error(ErrorCode::ShapeMismatch, "gemm inner dimensions " + a.shape_string() + " / " + b.shape_string());
    }
    if (op_a == Op::N) gemv(a, b, c);
    else gemv_t(a, b, c);
    return;
  }
  const std::size_t m = op_a == Op::N ? a.rows() : a.cols();
  const std::size_t k = op_a == Op::N ? a.cols() : a.rows();
  const std::size_t kb = op_b == Op::N ? b.rows() : b.cols();
  if (k != kb) throw Error(ErrorCode::ShapeMismatch, "gemm inner dimensions " + a.shape_string() + " / " + b.shape_string());
  Matrix bt;
  if (op_b == Op::T) bt = transpose(b);
  const Matrix& rhs = op_b == Op::T ? bt : b;
  if (op_a == Op::N) gemm_view(LeftView<false>{a.data(), a.cols()}, m, k, rhs, c);
  else gemm_view(LeftView<true>{a.data(), a.cols()}, m, k, rhs, c);
}

}  // namespace blocked

Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix c;
  blocked::gemm(Op::N, Op::N, a, b, c);
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  Matrix c;
  blocked::gemm(Op::T, Op::N, a, b, c);
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  Matrix c;
  blocked::gemm(Op::N, Op::T, a, b, c);
  return c;
}

}  // namespace mlr::kernels
