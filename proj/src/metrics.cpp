#include "mlr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mlr {

namespace {

void same_length(std::span<const Real> a, std::span<const Real> b, const char* what) {
  if (a.size() != b.size()) throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": length mismatch");
  if (a.empty()) throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": empty input");
}

// Average ranks (1-based) of v in ascending order.
std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double r2_score(std::span<const Real> y, std::span<const Real> pred) {
  same_length(y, pred, "r2");
  if (y.size() < 2) throw Error(ErrorCode::ZeroVariance, "r2 needs at least two samples");
  double mean = 0;
  for (Real v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (static_cast<double>(y[i]) - pred[i]) * (static_cast<double>(y[i]) - pred[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  if (ss_tot == 0) throw Error(ErrorCode::ZeroVariance, "target has zero variance");
  return 1.0 - ss_res / ss_tot;
}

double auc_score(std::span<const Real> y, std::span<const Real> scores) {
  same_length(y, scores, "auc");
  std::vector<double> s(scores.begin(), scores.end());
  const auto ranks = average_ranks(s);
  double pos = 0, rank_sum = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 1) {
      pos += 1;
      rank_sum += ranks[i];
    } else if (y[i] != 0) {
      throw Error(ErrorCode::ShapeMismatch, "auc labels must be 0 or 1");
    }
  }
  const double neg = static_cast<double>(y.size()) - pos;
  if (pos == 0 || neg == 0) throw Error(ErrorCode::SingleClass, "auc needs both classes");
  return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

double accuracy(std::span<const Real> y, std::span<const Real> labels) {
  same_length(y, labels, "accuracy");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hits += y[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(y.size());
}

double rmse(std::span<const Real> y, std::span<const Real> pred) {
  same_length(y, pred, "rmse");
  double ss = 0;
  for (std::size_t i = 0; i < y.size(); ++i) ss += (static_cast<double>(y[i]) - pred[i]) * (static_cast<double>(y[i]) - pred[i]);
  return std::sqrt(ss / static_cast<double>(y.size()));
}

double bce_logits(std::span<const Real> y, std::span<const Real> logits) {
  same_length(y, logits, "bce");
  double total = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double z = logits[i];
    const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    total += softplus - y[i] * z;
  }
  return total / static_cast<double>(y.size());
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(std::span<const double> v) {
  if (v.size() < 2) return 0;
  const double m = mean_of(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

void ScoreTable::validate() const {
  if (mean.size() != datasets.size()) throw Error(ErrorCode::ShapeMismatch, "score table row count");
  for (const auto& row : mean) {
    if (row.size() != methods.size()) throw Error(ErrorCode::ShapeMismatch, "score table is not rectangular");
  }
}

std::vector<double> friedman_rank(const ScoreTable& table) {
  table.validate();
  if (table.methods.size() < 2) throw Error(ErrorCode::InvalidConfig, "friedman rank needs at least two methods");
  std::vector<double> total(table.methods.size(), 0.0);
  for (const auto& row : table.mean) {
    std::vector<double> negated(row.size());
    for (std::size_t m = 0; m < row.size(); ++m) negated[m] = -row[m];
    const auto ranks = average_ranks(negated);
    for (std::size_t m = 0; m < row.size(); ++m) total[m] += ranks[m];
  }
  for (auto& t : total) t /= static_cast<double>(table.datasets.size());
  return total;
}

std::vector<double> p_at(const ScoreTable& table, double threshold) {
  table.validate();
  std::vector<double> hits(table.methods.size(), 0.0);
  for (const auto& row : table.mean) {
    const double best = *std::max_element(row.begin(), row.end());
    for (std::size_t m = 0; m < row.size(); ++m) hits[m] += row[m] >= threshold * best ? 1.0 : 0.0;
  }
  for (auto& h : hits) h /= static_cast<double>(table.datasets.size());
  return hits;
}

PmaResult pma(const ScoreTable& table) {
  table.validate();
  PmaResult out;
  out.value.assign(table.methods.size(), 0.0);
  std::size_t used = 0;
  for (const auto& row : table.mean) {
    const double best = *std::max_element(row.begin(), row.end());
    if (best <= 0) {
      ++out.excluded;
      continue;
    }
    ++used;
    for (std::size_t m = 0; m < row.size(); ++m) out.value[m] += row[m] / best;
  }
  for (auto& v : out.value) v = used == 0 ? 0.0 : v / static_cast<double>(used);
  return out;
}

std::vector<double> pma_direct(const ScoreTable& table) {
  table.validate();
  std::vector<double> out(table.methods.size(), 0.0);
  for (const auto& row : table.mean) {
    const double best = *std::max_element(row.begin(), row.end());
    for (std::size_t m = 0; m < row.size(); ++m) out[m] += row[m] / best;
  }
  for (auto& v : out) v /= static_cast<double>(table.datasets.size());
  return out;
}

}  // namespace mlr
