#pragma once

#include "mlr/matrix.hpp"

// Dense matrix products. Two implementations share one contract:
//   serial::  textbook triple loops, kept as the reference for tests;
//   blocked:: cache-blocked i-k-j kernel, rows of C split across OpenMP threads.
// Every entry of C is accumulated by a single thread in a fixed order, so
// results do not depend on the thread count. The two namespaces may differ in
// the last bits because their summation orders differ.
namespace mlr::kernels {

enum class Op { N, T };

namespace serial {
void gemm(Op op_a, Op op_b, const Matrix& a, const Matrix& b, Matrix& c);
}

namespace blocked {
void gemm(Op op_a, Op op_b, const Matrix& a, const Matrix& b, Matrix& c);
}

/// Number of threads the blocked kernel will use for an m x n x k product.
int planned_threads(std::size_t m, std::size_t n, std::size_t k);

/// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
/// C = A^T * B
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// C = A * B^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);

}  // namespace mlr::kernels
