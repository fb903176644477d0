#pragma once

#include <cstdint>
#include <random>

#include "mlr/matrix.hpp"

namespace mlr {

/// Independent stream seed for (master, stream id) via splitmix64.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  Real normal() { return static_cast<Real>(normal_(engine_)); }
  Real uniform(Real lo, Real hi) {
    return lo + (hi - lo) * static_cast<Real>(unit_(engine_));
  }
  /// Uniform on {0, ..., n-1}.
  std::size_t index(std::size_t n);

  /// rows x cols matrix of N(0, scale^2) draws.
  Matrix normal_matrix(std::size_t rows, std::size_t cols, Real scale = 1);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

// Stream ids used by the trainer. Kept here so tests can reproduce a stream.
namespace streams {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kPermutations = 2;
inline constexpr std::uint64_t kValidationSplit = 3;
inline constexpr std::uint64_t kBatches = 4;
inline constexpr std::uint64_t kLabelDither = 5;
inline constexpr std::uint64_t kStructDither = 6;
}  // namespace streams

}  // namespace mlr
