#include "mlr/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mlr/rng.hpp"

namespace mlr {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool is_missing_token(const std::string& s) {
  return s.empty() || s == "?" || s == "NA" || s == "NaN" || s == "nan";
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string canonical_number(double v) {
  if (v == 0) v = 0;  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::vector<std::string>> split_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      record.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<std::string> sorted_keys(const std::set<std::string>& keys, bool numeric) {
  std::vector<std::string> out(keys.begin(), keys.end());
  if (numeric) {
    // Numbers ascending, the missing key last.
    std::sort(out.begin(), out.end(), [](const std::string& a, const std::string& b) {
      if (a.empty() || b.empty()) return b.empty() && !a.empty();
      return std::stod(a) < std::stod(b);
    });
  }
  return out;
}

}  // namespace

std::optional<double> Column::number(std::size_t row) const {
  const auto& cell = cells.at(row);
  if (!cell) return std::nullopt;
  return parse_number(*cell);
}

std::size_t RawTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return i;
  }
  throw Error(ErrorCode::SchemaMismatch, "missing column '" + name + "'");
}

Schema parse_schema(const std::string& json_text) try {
  Schema s;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, std::string("schema is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::SchemaMismatch, "schema must be a JSON object");
  if (j.contains("target")) s.target = j.at("target").get<std::string>();
  if (j.contains("task")) {
    const auto t = j.at("task").get<std::string>();
    if (t == "reg" || t == "regression") s.task = TaskKind::Regression;
    else if (t == "clf" || t == "classification") s.task = TaskKind::Classification;
    else throw Error(ErrorCode::SchemaMismatch, "unknown task '" + t + "'");
  }
  if (j.contains("columns")) {
    for (const auto& [name, kind] : j.at("columns").items()) {
      const auto k = kind.get<std::string>();
      if (k == "numeric") s.kinds[name] = ColumnKind::Numeric;
      else if (k == "categorical") s.kinds[name] = ColumnKind::Categorical;
      else if (k == "target") s.target = name;
      else throw Error(ErrorCode::SchemaMismatch, "unknown kind '" + k + "' for column '" + name + "'");
    }
  }
  return s;
} catch (const nlohmann::json::exception& e) {
  throw Error(ErrorCode::SchemaMismatch, std::string("malformed schema: ") + e.what());
}

Schema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open schema " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_schema(ss.str());
}

RawTable parse_csv(const std::string& text, const Schema& schema) {
  auto records = split_records(text);
  if (records.empty()) throw Error(ErrorCode::NoHeader, "file has no header row");
  const auto& header = records.front();
  if (header.empty() || std::all_of(header.begin(), header.end(), [](const std::string& h) { return trim(h).empty(); })) {
    throw Error(ErrorCode::NoHeader, "header row is empty");
  }
  if (records.size() < 2) throw Error(ErrorCode::EmptyTable, "file has a header but no rows");
  RawTable t;
  for (const auto& h : header) t.columns.push_back({trim(h), ColumnKind::Numeric, {}});
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != header.size()) {
      throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                                                 " fields, header has " + std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
      std::string v = trim(records[r][c]);
      if (is_missing_token(v)) t.columns[c].cells.emplace_back(std::nullopt);
      else t.columns[c].cells.emplace_back(std::move(v));
    }
  }
  for (auto& col : t.columns) {
    bool numeric = false;
    bool all_parse = true;
    for (const auto& cell : col.cells) {
      if (!cell) continue;
      if (parse_number(*cell)) numeric = true;
      else all_parse = false;
    }
    col.kind = numeric && all_parse ? ColumnKind::Numeric : ColumnKind::Categorical;
    if (auto it = schema.kinds.find(col.name); it != schema.kinds.end()) col.kind = it->second;
  }
  for (const auto& [name, kind] : schema.kinds) t.column_index(name);
  t.target = schema.target ? t.column_index(*schema.target) : t.columns.size() - 1;
  return t;
}

RawTable load_csv(const std::string& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), schema);
}

RawTable table_from_matrix(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || y.cols() != 1) throw Error(ErrorCode::ShapeMismatch, "x and y row counts differ");
  RawTable t;
  for (std::size_t c = 0; c <= x.cols(); ++c) {
    Column col;
    col.name = c < x.cols() ? "x" + std::to_string(c + 1) : "y";
    col.kind = ColumnKind::Numeric;
    for (std::size_t r = 0; r < x.rows(); ++r) col.cells.emplace_back(canonical_number(c < x.cols() ? x(r, c) : y[r]));
    t.columns.push_back(std::move(col));
  }
  t.target = x.cols();
  return t;
}

std::size_t FittedTransform::output_dim() const {
  std::size_t d = 0;
  for (const auto& f : features) d += f.width();
  return d;
}

std::string category_key(const Column& column, std::size_t row) {
  const auto& cell = column.cells.at(row);
  if (!cell) return {};
  if (column.kind == ColumnKind::Numeric) {
    const auto v = parse_number(*cell);
    return v ? canonical_number(*v) : std::string{};
  }
  return *cell;
}

std::vector<std::size_t> rows_with_target(const RawTable& table) {
  std::vector<std::size_t> rows;
  const auto& target = table.columns.at(table.target);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (!target.cells[r]) continue;
    if (target.kind == ColumnKind::Numeric && !target.number(r)) continue;
    rows.push_back(r);
  }
  return rows;
}

FittedTransform fit_transform(const RawTable& table, std::span<const std::size_t> rows, TaskKind task) {
  if (rows.empty()) throw Error(ErrorCode::EmptyTable, "no rows to fit");
  FittedTransform t;
  t.task = task;
  const Column& target = table.columns.at(table.target);
  t.target_name = target.name;

  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c == table.target) continue;
    const Column& col = table.columns[c];
    std::set<std::string> keys;
    for (std::size_t r : rows) keys.insert(category_key(col, r));
    const std::size_t n_j = keys.size();
    const bool numeric = col.kind == ColumnKind::Numeric;
    FeaturePlan plan;
    plan.name = col.name;
    plan.numeric_source = numeric;
    if (n_j <= 1 || (!numeric && n_j > 12)) {
      t.dropped.push_back(col.name);
      continue;
    }
    if (numeric && n_j > 12) {
      plan.encoding = Encoding::Standardize;
      double sum = 0;
      std::size_t present = 0;
      for (std::size_t r : rows) {
        if (auto v = col.number(r)) {
          sum += *v;
          ++present;
        }
      }
      plan.mean = sum / static_cast<double>(present);
      // Missing cells take the mean, so they add nothing to the spread.
      double ss = 0;
      for (std::size_t r : rows) {
        if (auto v = col.number(r)) ss += (*v - plan.mean) * (*v - plan.mean);
      }
      const double sd = std::sqrt(ss / static_cast<double>(rows.size()));
      plan.scale = sd < 1e-12 ? 1.0 : sd;
    } else {
      plan.encoding = n_j == 2 ? Encoding::Binary : Encoding::OneHot;
      plan.categories = sorted_keys(keys, numeric);
    }
    t.features.push_back(std::move(plan));
  }
  if (t.features.empty()) throw Error(ErrorCode::NoUsableFeatures, "every feature column was dropped");

  if (task == TaskKind::Classification) {
    std::set<std::string> labels;
    for (std::size_t r : rows) labels.insert(category_key(target, r));
    if (labels.size() < 2) throw Error(ErrorCode::SingleClassTarget, "target '" + target.name + "' has a single class");
    if (labels.size() > 2) {
      throw Error(ErrorCode::UnsupportedTarget, "target '" + target.name + "' has " + std::to_string(labels.size()) +
                                                    " classes; only binary targets are supported");
    }
    t.class_labels = sorted_keys(labels, target.kind == ColumnKind::Numeric);
  } else {
    double sum = 0;
    for (std::size_t r : rows) {
      const auto v = target.number(r);
      if (!v) throw Error(ErrorCode::UnsupportedTarget, "target '" + target.name + "' is not numeric at row " + std::to_string(r + 1));
      sum += *v;
    }
    t.target_mean = sum / static_cast<double>(rows.size());
    double ss = 0;
    for (std::size_t r : rows) ss += (*target.number(r) - t.target_mean) * (*target.number(r) - t.target_mean);
    const double sd = std::sqrt(ss / static_cast<double>(rows.size()));
    t.target_scale = sd < 1e-12 ? 1.0 : sd;
  }
  return t;
}

Matrix transform_features(const FittedTransform& t, const RawTable& table, std::span<const std::size_t> rows) {
  Matrix x(rows.size(), t.output_dim());
  std::size_t offset = 0;
  for (const auto& f : t.features) {
    const Column& col = table.columns.at(table.column_index(f.name));
    if (f.numeric_source && col.kind != ColumnKind::Numeric && f.encoding == Encoding::Standardize) {
      throw Error(ErrorCode::SchemaMismatch, "column '" + f.name + "' was numeric when the model was fitted");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::size_t r = rows[i];
      switch (f.encoding) {
        case Encoding::Standardize: {
          const double v = col.number(r).value_or(f.mean);
          x(i, offset) = static_cast<Real>((v - f.mean) / f.scale);
          break;
        }
        case Encoding::Binary:
          x(i, offset) = category_key(col, r) == f.categories[1] ? Real(1) : Real(0);
          break;
        case Encoding::OneHot: {
          const auto key = category_key(col, r);
          const auto it = std::find(f.categories.begin(), f.categories.end(), key);
          if (it != f.categories.end()) x(i, offset + static_cast<std::size_t>(it - f.categories.begin())) = 1;
          break;
        }
      }
    }
    offset += f.width();
  }
  return x;
}

Matrix transform_target(const FittedTransform& t, const RawTable& table, std::span<const std::size_t> rows) {
  const Column& col = table.columns.at(table.column_index(t.target_name));
  Matrix y(rows.size(), 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (t.task == TaskKind::Classification) {
      const auto key = category_key(col, rows[i]);
      if (key == t.class_labels[1]) y[i] = 1;
      else if (key == t.class_labels[0]) y[i] = 0;
      else throw Error(ErrorCode::UnsupportedTarget, "unknown class '" + key + "' in target '" + t.target_name + "'");
    } else {
      const auto v = col.number(rows[i]);
      if (!v) throw Error(ErrorCode::UnsupportedTarget, "missing target at row " + std::to_string(rows[i] + 1));
      y[i] = static_cast<Real>((*v - t.target_mean) / t.target_scale);
    }
  }
  return y;
}

double inverse_target(const FittedTransform& t, double value) { return value * t.target_scale + t.target_mean; }

namespace {

Dataset apply(const FittedTransform& t, const RawTable& table, std::vector<std::size_t> rows) {
  Dataset d;
  d.task = t.task;
  d.transform = t;
  d.x = transform_features(t, table, rows);
  d.y = transform_target(t, table, rows);
  d.rows = std::move(rows);
  return d;
}

}  // namespace

Dataset preprocess(const RawTable& table, TaskKind task) {
  auto rows = rows_with_target(table);
  if (rows.empty()) throw Error(ErrorCode::EmptyTable, "no rows with a target value");
  const FittedTransform t = fit_transform(table, rows, task);
  return apply(t, table, std::move(rows));
}

SplitData train_test_split(const RawTable& table, TaskKind task, double test_fraction, std::uint64_t seed,
                           bool fit_on_all) {
  auto rows = rows_with_target(table);
  const std::size_t n = rows.size();
  if (n < 10) throw Error(ErrorCode::TooFewSamples, "need at least 10 rows to split, got " + std::to_string(n));
  if (!(test_fraction > 0 && test_fraction < 1)) throw Error(ErrorCode::InvalidConfig, "test fraction must lie in (0, 1)");
  const auto n_test = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n))));
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(rows[i], rows[rng.index(i + 1)]);
  std::vector<std::size_t> test(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  const FittedTransform t = fit_on_all ? fit_transform(table, rows_with_target(table), task) : fit_transform(table, train, task);
  return {apply(t, table, std::move(train)), apply(t, table, std::move(test))};
}

}  // namespace mlr
