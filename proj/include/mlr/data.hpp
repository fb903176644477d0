#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlr/matrix.hpp"
#include "mlr/model.hpp"

namespace mlr {

enum class ColumnKind { Numeric, Categorical };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::vector<std::optional<std::string>> cells;  // nullopt = missing

  /// Parsed value, or nullopt for missing and unparseable cells.
  std::optional<double> number(std::size_t row) const;
};

struct RawTable {
  std::vector<Column> columns;
  std::size_t target = 0;  // index into columns

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().cells.size(); }
  std::size_t column_index(const std::string& name) const;  // throws SchemaMismatch
};

/// Optional sidecar pinning the target and column kinds:
///   {"target": "y", "task": "reg", "columns": {"colour": "categorical", "age": "numeric"}}
struct Schema {
  std::optional<std::string> target;
  std::optional<TaskKind> task;
  std::map<std::string, ColumnKind> kinds;
};

Schema load_schema(const std::string& path);
Schema parse_schema(const std::string& json_text);

/// Header row required; empty cells (and "?", "NA", "NaN") are missing. A column
/// is numeric when every present cell parses as a number. Without a schema
/// target the last column is the target.
RawTable parse_csv(const std::string& text, const Schema& schema = {});
RawTable load_csv(const std::string& path, const Schema& schema = {});

/// Features and target as a table, for generated data.
RawTable table_from_matrix(const Matrix& x, const Matrix& y);

enum class Encoding { Standardize, Binary, OneHot };

struct FeaturePlan {
  std::string name;
  Encoding encoding = Encoding::Standardize;
  bool numeric_source = true;
  double mean = 0;  // Standardize
  double scale = 1;
  std::vector<std::string> categories;  // Binary: {zero, one}; OneHot: one column each

  std::size_t width() const { return encoding == Encoding::OneHot ? categories.size() : 1; }
  bool operator==(const FeaturePlan&) const = default;
};

/// Everything needed to map raw rows to model inputs and back.
struct FittedTransform {
  std::vector<FeaturePlan> features;
  std::vector<std::string> dropped;
  std::string target_name;
  TaskKind task = TaskKind::Regression;
  double target_mean = 0;
  double target_scale = 1;
  std::vector<std::string> class_labels;  // classification: labels of 0 and 1

  std::size_t output_dim() const;
  bool operator==(const FittedTransform&) const = default;
};

/// Category key of a cell: "" for missing, the canonical number for numeric
/// sources, the trimmed text otherwise.
std::string category_key(const Column& column, std::size_t row);

/// Rows with a missing target must already be excluded from `rows`.
FittedTransform fit_transform(const RawTable& table, std::span<const std::size_t> rows, TaskKind task);
Matrix transform_features(const FittedTransform& t, const RawTable& table, std::span<const std::size_t> rows);
Matrix transform_target(const FittedTransform& t, const RawTable& table, std::span<const std::size_t> rows);
double inverse_target(const FittedTransform& t, double value);

/// Row indices whose target cell is present.
std::vector<std::size_t> rows_with_target(const RawTable& table);

struct Dataset {
  Matrix x;
  Matrix y;
  TaskKind task = TaskKind::Regression;
  FittedTransform transform;
  std::vector<std::size_t> rows;  // source rows in the raw table
};

/// Drops rows with a missing target, fits on all remaining rows and applies.
Dataset preprocess(const RawTable& table, TaskKind task);

struct SplitData {
  Dataset train;
  Dataset test;
};

/// Random split of the usable rows (no stratification). Statistics are fitted
/// on the train side only unless fit_on_all is set.
SplitData train_test_split(const RawTable& table, TaskKind task, double test_fraction, std::uint64_t seed,
                           bool fit_on_all = false);

}  // namespace mlr
