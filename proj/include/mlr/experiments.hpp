#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlr/data.hpp"
#include "mlr/ensemble.hpp"
#include "mlr/metrics.hpp"

namespace mlr {

struct NamedTable {
  std::string name;
  RawTable table;
  TaskKind task = TaskKind::Regression;
};

/// Linear, additive and sparse generators at Bayes R^2 0.6, one draw each.
std::vector<NamedTable> synthetic_suite(std::size_t n = 100, std::size_t d = 8, std::uint64_t seed = 11);

/// One method trained and scored on one train/test split of one dataset.
struct Cell {
  std::string dataset;
  std::string method;
  std::uint64_t split_seed = 0;
  std::map<std::string, double> metrics;  // "r2", or "accuracy" and "auc"
  double validation_score = 0;            // mean over members
  double best_iteration = 0;              // mean over members
  double lambda_init = 0;                 // mean over members
  double seconds = 0;
  bool failed = false;
  std::string error;
};

struct Aggregate {
  std::string dataset;
  std::string method;
  std::string metric;
  double mean = 0;
  double std = 0;
  std::size_t n_splits = 0;
};

/// Mean and sample std per (dataset, method, metric) over the cells that did
/// not fail, in order of first appearance.
std::vector<Aggregate> aggregate(std::span<const Cell> cells);

struct ExperimentOptions {
  MlrConfig base = MlrConfig::for_depth(2);
  std::size_t repeats = 20;
  std::uint64_t seed = 0;  // split r uses seed + r
  double test_fraction = 0.2;
  std::size_t workers = 1;
  std::size_t bag_members = 10;
  bool bagged = true;      // ablation: also run every variant bagged
  bool fit_on_all = false;
};

/// Model seed used for every method on a given split, so methods differ only
/// by their configuration.
std::uint64_t model_seed(std::uint64_t split_seed);

/// Trains `spec` on one split and scores it on the held-out part. Errors are
/// captured in the cell.
Cell run_cell(const NamedTable& data, const std::string& method, const EnsembleSpec& spec, const MlrConfig& config,
              std::uint64_t split_seed, const ExperimentOptions& options);

struct ExperimentReport {
  std::string kind;  // ablate, sweep, bench
  ExperimentOptions options;
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<Cell> cells;
};

// ---------------------------------------------------------------------------
// Ablation

inline constexpr std::size_t kAblationVariants = 5;
/// FFNN, FFNN+Ridge, FFNN+Ridge+StructDither, FFNN+Ridge+Permutations, MLR.
const std::vector<std::string>& ablation_variant_names();
MlrConfig ablation_config(const MlrConfig& base, std::size_t variant);
/// Name of the bagged counterpart of a method.
std::string bagged_name(const std::string& method);

ExperimentReport run_ablation(std::span<const NamedTable> tables, const ExperimentOptions& options);

struct AblationRow {
  std::string variant;
  double single_mean = 0, single_std = 0;
  double bagged_mean = 0, bagged_std = 0;
  std::size_t splits = 0;
};

/// Per split, test R^2 averaged over the datasets; then mean and std over the
/// splits where every dataset succeeded. Bagged columns are NaN when absent.
std::vector<AblationRow> ablation_table(const ExperimentReport& report);

// ---------------------------------------------------------------------------
// Sweep

enum class SweepParam { StructDither, Permutations, LambdaInit, LabelDither, Width, BatchSize, Depth };

SweepParam parse_sweep_param(const std::string& name);
std::string to_string(SweepParam param);
MlrConfig sweep_config(const MlrConfig& base, SweepParam param, double value);
std::string sweep_method(SweepParam param, double value);

ExperimentReport run_sweep(SweepParam param, std::span<const double> grid, std::span<const NamedTable> tables,
                           const ExperimentOptions& options);

struct SweepRow {
  double value = 0;
  double test_r2 = 0, test_r2_std = 0;
  double validation = 0;
  double best_iteration = 0;
  double seconds = 0;
  double lambda_init = 0;
  std::size_t cells = 0;
  std::size_t failures = 0;
};

/// One row per grid point, averaged over datasets and splits.
std::vector<SweepRow> sweep_table(const ExperimentReport& report);

// ---------------------------------------------------------------------------
// Benchmark

/// Method label for an ensemble name: MLR2, Bag-MLR1, Ens-MLR, Best-MLR, Top5-MLR.
std::string method_label(const std::string& ensemble_name, int depth);

ExperimentReport run_bench(std::span<const NamedTable> tables, std::span<const std::string> ensemble_names,
                           const ExperimentOptions& options);

struct BenchSummary {
  ScoreTable table;  // primary metric: R^2 or accuracy
  std::string metric;
  std::vector<double> friedman;
  std::vector<double> p90, p95, p98;
  PmaResult pma;
  std::vector<double> pma_direct;
  std::vector<std::string> incomplete;  // datasets left out: some method never scored
};

/// Needs every dataset to share one task.
BenchSummary bench_summary(const ExperimentReport& report);

// ---------------------------------------------------------------------------
// Output

nlohmann::json to_json(const MlrConfig& config);
nlohmann::json to_json(const ExperimentOptions& options);

/// Writes {dataset}_{method}_{seed}.report per (dataset, method), aggregate.csv
/// and summary.txt into `dir`. Timings are left out in deterministic mode so
/// the files can be regenerated bit for bit.
void write_reports(const ExperimentReport& report, const std::string& dir);
std::string aggregate_csv(std::span<const Aggregate> rows);
std::string report_file_name(const std::string& dataset, const std::string& method, std::uint64_t seed);
/// Aligned text table for a report.
std::string summary_text(const ExperimentReport& report);

}  // namespace mlr
