#pragma once

#include <cstdint>
#include <string>

#include "mlr/matrix.hpp"

namespace mlr {

/// Regression generators on x ~ N(0, I_d), d >= 3. Noise is Gaussian with its
/// variance set so that Var f / Var y equals the requested Bayes R^2.
enum class SyntheticKind {
  Linear,    // f = x beta, beta_j = (-1)^j / (1 + j / 2)
  Additive,  // f = 2 sin(x1) + x2^2 / 2 + tanh(2 x3) + small linear tail
  Sparse,    // f = 2 x1 - 1.5 x2, every other column is noise
};

struct SyntheticData {
  Matrix x;
  Matrix y;
  std::string name;
  double noise_sd = 0;
};

std::string to_string(SyntheticKind kind);
/// Population variance of f under the generator's input law (fixed-seed Monte Carlo
/// for the additive case, closed form otherwise).
double signal_variance(SyntheticKind kind, std::size_t d);
SyntheticData make_synthetic(SyntheticKind kind, std::size_t n, std::size_t d, std::uint64_t seed,
                             double bayes_r2 = 0.6);

}  // namespace mlr
