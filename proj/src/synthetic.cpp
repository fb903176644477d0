#include "mlr/synthetic.hpp"

#include <cmath>

#include "mlr/rng.hpp"

namespace mlr {

namespace {

double beta(std::size_t j) { return (j % 2 == 0 ? 1.0 : -1.0) / (1.0 + static_cast<double>(j) / 2.0); }

double signal(SyntheticKind kind, std::span<const Real> x) {
  switch (kind) {
    case SyntheticKind::Linear: {
      double f = 0;
      for (std::size_t j = 0; j < x.size(); ++j) f += beta(j) * x[j];
      return f;
    }
    case SyntheticKind::Additive: {
      double f = 2.0 * std::sin(x[0]) + 0.5 * x[1] * x[1] + std::tanh(2.0 * x[2]);
      for (std::size_t j = 3; j < x.size(); ++j) f += 0.25 * beta(j) * x[j];
      return f;
    }
    case SyntheticKind::Sparse:
      return 2.0 * x[0] - 1.5 * x[1];
  }
  return 0;
}

}  // namespace

std::string to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::Linear: return "synthetic_linear";
    case SyntheticKind::Additive: return "synthetic_additive";
    case SyntheticKind::Sparse: return "synthetic_sparse";
  }
  return "synthetic";
}

double signal_variance(SyntheticKind kind, std::size_t d) {
  switch (kind) {
    case SyntheticKind::Linear: {
      double v = 0;
      for (std::size_t j = 0; j < d; ++j) v += beta(j) * beta(j);
      return v;
    }
    case SyntheticKind::Sparse:
      return 4.0 + 2.25;
    case SyntheticKind::Additive: {
      Rng rng(0x5eed);
      constexpr std::size_t kDraws = 400000;
      std::vector<Real> x(d);
      double mean = 0, m2 = 0;
      for (std::size_t i = 0; i < kDraws; ++i) {
        for (auto& v : x) v = rng.normal();
        const double f = signal(kind, x);
        const double delta = f - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (f - mean);
      }
      return m2 / static_cast<double>(kDraws);
    }
  }
  return 0;
}

SyntheticData make_synthetic(SyntheticKind kind, std::size_t n, std::size_t d, std::uint64_t seed, double bayes_r2) {
  if (d < 3) throw Error(ErrorCode::InvalidConfig, "synthetic generators need d >= 3");
  if (!(bayes_r2 > 0 && bayes_r2 <= 1)) throw Error(ErrorCode::InvalidConfig, "Bayes R^2 must lie in (0, 1]");
  SyntheticData out;
  out.name = to_string(kind);
  out.noise_sd = std::sqrt(signal_variance(kind, d) * (1.0 - bayes_r2) / bayes_r2);
  Rng rng(seed);
  out.x = rng.normal_matrix(n, d);
  out.y = Matrix(n, 1);
  for (std::size_t i = 0; i < n; ++i) out.y[i] = static_cast<Real>(signal(kind, out.x.row(i)) + out.noise_sd * rng.normal());
  return out;
}

}  // namespace mlr
