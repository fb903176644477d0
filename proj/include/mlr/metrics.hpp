#pragma once

#include <span>
#include <string>
#include <vector>

#include "mlr/matrix.hpp"

namespace mlr {

/// 1 - SS_res / SS_tot. Throws ZeroVariance for a constant target.
double r2_score(std::span<const Real> y, std::span<const Real> pred);
/// P(score of a random positive > score of a random negative), ties count 1/2.
/// Rank-sum form with average ranks for ties.
double auc_score(std::span<const Real> y, std::span<const Real> scores);
double accuracy(std::span<const Real> y, std::span<const Real> labels);
double rmse(std::span<const Real> y, std::span<const Real> pred);
/// Mean binary cross-entropy of labels y in {0,1} against logits.
double bce_logits(std::span<const Real> y, std::span<const Real> logits);

double mean_of(std::span<const double> v);
/// Sample standard deviation (n - 1); 0 for fewer than two values.
double std_of(std::span<const double> v);

/// Rows are datasets, columns are methods; higher scores are better.
struct ScoreTable {
  std::vector<std::string> datasets;
  std::vector<std::string> methods;
  std::vector<std::vector<double>> mean;  // [dataset][method]
  std::vector<std::vector<double>> std;
  std::size_t repeats = 0;

  void validate() const;
};

/// Mean rank per method; rank 1 is best and ties share the average rank.
std::vector<double> friedman_rank(const ScoreTable& table);
/// Fraction of datasets where a method reaches threshold * per-dataset max.
std::vector<double> p_at(const ScoreTable& table, double threshold);

struct PmaResult {
  std::vector<double> value;  // per method
  std::size_t excluded = 0;   // datasets whose max is not positive
};

/// Mean of score / per-dataset max, skipping datasets whose max is <= 0.
PmaResult pma(const ScoreTable& table);
/// Same ratio without skipping any dataset.
std::vector<double> pma_direct(const ScoreTable& table);

}  // namespace mlr
