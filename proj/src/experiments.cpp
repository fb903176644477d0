#include "mlr/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

#include "mlr/parallel.hpp"
#include "mlr/rng.hpp"
#include "mlr/synthetic.hpp"

namespace mlr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kModelStream = 0x6d6f64656cULL;

bool deterministic(const ExperimentOptions& o) { return !o.base.enforce_budget; }

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string number(double v) { return fmt("%.10g", v); }

struct Job {
  const NamedTable* data;
  std::string method;
  EnsembleSpec spec;
  MlrConfig config;
  std::uint64_t split_seed;
};

std::vector<Cell> run_jobs(const std::vector<Job>& jobs, const ExperimentOptions& options) {
  std::vector<Cell> cells(jobs.size());
  parallel_for(jobs.size(), static_cast<int>(options.workers), [&](std::size_t i) {
    const Job& j = jobs[i];
    cells[i] = run_cell(*j.data, j.method, j.spec, j.config, j.split_seed, options);
  });
  return cells;
}

std::vector<std::uint64_t> split_seeds(const ExperimentOptions& o) {
  std::vector<std::uint64_t> s(o.repeats);
  for (std::size_t r = 0; r < o.repeats; ++r) s[r] = o.seed + r;
  return s;
}

std::vector<std::string> datasets_in_order(const std::vector<Cell>& cells) {
  std::vector<std::string> out;
  for (const auto& c : cells) {
    if (std::find(out.begin(), out.end(), c.dataset) == out.end()) out.push_back(c.dataset);
  }
  return out;
}

// Per split seed, the mean of `metric` over all datasets; splits where some
// dataset is missing or failed are dropped.
std::vector<double> cross_dataset_series(const ExperimentReport& report, const std::string& method,
                                         const std::string& metric) {
  const auto datasets = datasets_in_order(report.cells);
  std::map<std::uint64_t, std::pair<double, std::size_t>> per_split;
  std::map<std::uint64_t, bool> broken;
  for (const auto& c : report.cells) {
    if (c.method != method) continue;
    if (c.failed || !c.metrics.contains(metric)) {
      broken[c.split_seed] = true;
      continue;
    }
    auto& [sum, count] = per_split[c.split_seed];
    sum += c.metrics.at(metric);
    ++count;
  }
  std::vector<double> series;
  for (const auto& [seed, acc] : per_split) {
    if (broken[seed] || acc.second != datasets.size()) continue;
    series.push_back(acc.first / static_cast<double>(acc.second));
  }
  return series;
}

std::string task_name(TaskKind t) { return t == TaskKind::Regression ? "reg" : "clf"; }

std::string sanitize(const std::string& s) {
  std::string out;
  for (char ch : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '+' || ch == '=' ||
                    ch == '.';
    out.push_back(ok ? ch : '_');
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  return out + "\"";
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

std::string pm(double mean, double sd) {
  if (std::isnan(mean)) return "-";
  return fmt("%.3f", mean) + " +- " + fmt("%.3f", sd);
}

}  // namespace

std::vector<NamedTable> synthetic_suite(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::vector<NamedTable> out;
  for (auto kind : {SyntheticKind::Linear, SyntheticKind::Additive, SyntheticKind::Sparse}) {
    auto data = make_synthetic(kind, n, d, seed);
    out.push_back({data.name, table_from_matrix(data.x, data.y), TaskKind::Regression});
  }
  return out;
}

std::vector<Aggregate> aggregate(std::span<const Cell> cells) {
  std::vector<std::tuple<std::string, std::string, std::string>> order;
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> values;
  for (const auto& c : cells) {
    if (c.failed) continue;
    for (const auto& [metric, v] : c.metrics) {
      auto key = std::make_tuple(c.dataset, c.method, metric);
      auto [it, inserted] = values.try_emplace(key);
      if (inserted) order.push_back(key);
      it->second.push_back(v);
    }
  }
  std::vector<Aggregate> out;
  for (const auto& key : order) {
    const auto& v = values[key];
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), mean_of(v), std_of(v), v.size()});
  }
  return out;
}

std::uint64_t model_seed(std::uint64_t split_seed) { return derive_seed(split_seed, kModelStream); }

Cell run_cell(const NamedTable& data, const std::string& method, const EnsembleSpec& spec, const MlrConfig& config,
              std::uint64_t split_seed, const ExperimentOptions& options) {
  Cell cell;
  cell.dataset = data.name;
  cell.method = method;
  cell.split_seed = split_seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    MlrConfig cfg = config;
    cfg.task = data.task;
    if (data.task == TaskKind::Classification) cfg.label_dither = 0;
    const auto split = train_test_split(data.table, data.task, options.test_fraction, split_seed, options.fit_on_all);
    const auto ens = train_ensemble(spec, cfg, split.train.x, split.train.y, model_seed(split_seed), 1);
    const Matrix pred = ensemble_predict(ens, split.test.x);
    const auto truth = split.test.y.flat();
    if (data.task == TaskKind::Regression) {
      cell.metrics["r2"] = r2_score(truth, pred.flat());
    } else {
      std::vector<Real> labels(pred.size());
      for (std::size_t i = 0; i < pred.size(); ++i) labels[i] = pred[i] > Real(0.5) ? 1 : 0;
      cell.metrics["accuracy"] = accuracy(truth, labels);
      cell.metrics["auc"] = auc_score(truth, pred.flat());
    }
    double val = 0, best = 0, lam = 0;
    for (const auto& m : ens.members) {
      if (m.failed) continue;
      val += m.validation_score();
      best += static_cast<double>(m.result.record.best_iteration);
      lam += m.result.record.lambda_init.lambda;
    }
    const auto k = static_cast<double>(ens.healthy());
    cell.validation_score = val / k;
    cell.best_iteration = best / k;
    cell.lambda_init = lam / k;
  } catch (const std::exception& e) {
    cell.failed = true;
    cell.error = e.what();
    cell.metrics.clear();
  }
  cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return cell;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& ablation_variant_names() {
  static const std::vector<std::string> names = {"FFNN", "FFNN+Ridge", "FFNN+Ridge+StructDither",
                                                 "FFNN+Ridge+Permutations", "MLR"};
  return names;
}

MlrConfig ablation_config(const MlrConfig& base, std::size_t variant) {
  MlrConfig c = base;
  switch (variant) {
    case 0:
      c.head = HeadKind::Learned;
      c.permutations = 0;
      c.struct_dither = 0;
      c.label_dither = 0;
      break;
    case 1:
      c.permutations = 0;
      c.struct_dither = 0;
      break;
    case 2: c.permutations = 0; break;
    case 3: c.struct_dither = 0; break;
    case 4: break;
    default: throw Error(ErrorCode::InvalidConfig, "ablation variant out of range");
  }
  return c;
}

std::string bagged_name(const std::string& method) { return "Bag-" + method; }

ExperimentReport run_ablation(std::span<const NamedTable> tables, const ExperimentOptions& options) {
  for (const auto& t : tables) {
    if (t.task != TaskKind::Regression) throw Error(ErrorCode::InvalidConfig, "ablation needs regression datasets");
  }
  options.base.validate();
  ExperimentReport report;
  report.kind = "ablate";
  report.options = options;
  report.parameters["variants"] = ablation_variant_names();
  report.parameters["bag_members"] = options.bagged ? options.bag_members : 0;
  std::vector<Job> jobs;
  const auto seeds = split_seeds(options);
  for (const auto& t : tables) {
    for (std::size_t v = 0; v < kAblationVariants; ++v) {
      const MlrConfig cfg = ablation_config(options.base, v);
      const auto& name = ablation_variant_names()[v];
      for (auto s : seeds) jobs.push_back({&t, name, EnsembleSpec::single(cfg.depth), cfg, s});
      if (!options.bagged) continue;
      for (auto s : seeds) {
        jobs.push_back({&t, bagged_name(name), EnsembleSpec::bag(cfg.depth, options.bag_members), cfg, s});
      }
    }
  }
  report.cells = run_jobs(jobs, options);
  return report;
}

std::vector<AblationRow> ablation_table(const ExperimentReport& report) {
  std::vector<AblationRow> rows;
  for (const auto& name : ablation_variant_names()) {
    AblationRow row;
    row.variant = name;
    const auto single = cross_dataset_series(report, name, "r2");
    const auto bagged = cross_dataset_series(report, bagged_name(name), "r2");
    row.single_mean = single.empty() ? kNaN : mean_of(single);
    row.single_std = single.empty() ? kNaN : std_of(single);
    row.bagged_mean = bagged.empty() ? kNaN : mean_of(bagged);
    row.bagged_std = bagged.empty() ? kNaN : std_of(bagged);
    row.splits = single.size();
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------

SweepParam parse_sweep_param(const std::string& name) {
  static const std::map<std::string, SweepParam> names = {
      {"sigma_struct", SweepParam::StructDither}, {"sigma-struct", SweepParam::StructDither},
      {"struct_dither", SweepParam::StructDither}, {"T", SweepParam::Permutations},
      {"permutations", SweepParam::Permutations}, {"lambda_init", SweepParam::LambdaInit},
      {"lambda-init", SweepParam::LambdaInit},     {"label_dither", SweepParam::LabelDither},
      {"label-dither", SweepParam::LabelDither},   {"J", SweepParam::Width},
      {"width", SweepParam::Width},                {"bs", SweepParam::BatchSize},
      {"batch_size", SweepParam::BatchSize},       {"batch-size", SweepParam::BatchSize},
      {"L", SweepParam::Depth},                    {"depth", SweepParam::Depth},
  };
  const auto it = names.find(name);
  if (it == names.end()) throw Error(ErrorCode::InvalidConfig, "unknown sweep parameter '" + name + "'");
  return it->second;
}

std::string to_string(SweepParam param) {
  switch (param) {
    case SweepParam::StructDither: return "sigma_struct";
    case SweepParam::Permutations: return "T";
    case SweepParam::LambdaInit: return "lambda_init";
    case SweepParam::LabelDither: return "label_dither";
    case SweepParam::Width: return "J";
    case SweepParam::BatchSize: return "batch_size";
    case SweepParam::Depth: return "L";
  }
  return "?";
}

MlrConfig sweep_config(const MlrConfig& base, SweepParam param, double value) {
  auto whole = [&](double lo) {
    if (!(value >= lo) || value != std::floor(value) || value > 1e9) {
      throw Error(ErrorCode::InvalidConfig, to_string(param) + " needs an integer >= " + number(lo) + ", got " +
                                                number(value));
    }
    return static_cast<std::size_t>(value);
  };
  MlrConfig c = base;
  switch (param) {
    case SweepParam::StructDither: c.struct_dither = value; break;
    case SweepParam::Permutations: c.permutations = whole(0); break;
    case SweepParam::LambdaInit: c.lambda_init = value; break;
    case SweepParam::LabelDither: c.label_dither = value; break;
    case SweepParam::Width: c.width = whole(1); break;
    case SweepParam::BatchSize: c.batch_size = whole(1); break;
    case SweepParam::Depth: c.apply_depth_defaults(static_cast<int>(whole(1))); break;
  }
  c.validate();
  return c;
}

std::string sweep_method(SweepParam param, double value) { return to_string(param) + "=" + number(value); }

ExperimentReport run_sweep(SweepParam param, std::span<const double> grid, std::span<const NamedTable> tables,
                           const ExperimentOptions& options) {
  if (grid.empty()) throw Error(ErrorCode::InvalidConfig, "sweep grid is empty");
  ExperimentReport report;
  report.kind = "sweep";
  report.options = options;
  report.parameters["param"] = to_string(param);
  report.parameters["grid"] = std::vector<double>(grid.begin(), grid.end());
  // Bad grid values are configuration errors and stop the sweep before any training.
  std::vector<MlrConfig> configs;
  for (double v : grid) configs.push_back(sweep_config(options.base, param, v));
  std::vector<Job> jobs;
  const auto seeds = split_seeds(options);
  for (const auto& t : tables) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      for (auto s : seeds) {
        jobs.push_back({&t, sweep_method(param, grid[g]), EnsembleSpec::single(configs[g].depth), configs[g], s});
      }
    }
  }
  report.cells = run_jobs(jobs, options);
  return report;
}

std::vector<SweepRow> sweep_table(const ExperimentReport& report) {
  const auto param = parse_sweep_param(report.parameters.at("param").get<std::string>());
  std::vector<SweepRow> rows;
  for (double v : report.parameters.at("grid").get<std::vector<double>>()) {
    SweepRow row;
    row.value = v;
    const auto method = sweep_method(param, v);
    std::vector<double> r2, val, best, sec, lam;
    for (const auto& c : report.cells) {
      if (c.method != method) continue;
      ++row.cells;
      if (c.failed) {
        ++row.failures;
        continue;
      }
      r2.push_back(c.metrics.at("r2"));
      val.push_back(c.validation_score);
      best.push_back(c.best_iteration);
      sec.push_back(c.seconds);
      lam.push_back(c.lambda_init);
    }
    const bool any = !r2.empty();
    row.test_r2 = any ? mean_of(r2) : kNaN;
    row.test_r2_std = any ? std_of(r2) : kNaN;
    row.validation = any ? mean_of(val) : kNaN;
    row.best_iteration = any ? mean_of(best) : kNaN;
    row.seconds = any ? mean_of(sec) : kNaN;
    row.lambda_init = any ? mean_of(lam) : kNaN;
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------

std::string method_label(const std::string& ensemble_name, int depth) {
  const auto spec = EnsembleSpec::parse(ensemble_name, depth);
  switch (spec.kind) {
    case EnsembleKind::Single: return "MLR" + std::to_string(spec.depths.front());
    case EnsembleKind::Bag: return "Bag-MLR" + std::to_string(spec.depths.front());
    case EnsembleKind::Ens: return "Ens-MLR";
    case EnsembleKind::Best: return "Best-MLR";
    case EnsembleKind::Top5: return "Top5-MLR";
  }
  return ensemble_name;
}

ExperimentReport run_bench(std::span<const NamedTable> tables, std::span<const std::string> ensemble_names,
                           const ExperimentOptions& options) {
  if (ensemble_names.empty()) throw Error(ErrorCode::InvalidConfig, "bench needs at least one method");
  options.base.validate();
  ExperimentReport report;
  report.kind = "bench";
  report.options = options;
  std::vector<std::pair<std::string, EnsembleSpec>> methods;
  for (const auto& name : ensemble_names) {
    methods.emplace_back(method_label(name, options.base.depth), EnsembleSpec::parse(name, options.base.depth));
  }
  report.parameters["methods"] = std::vector<std::string>(ensemble_names.begin(), ensemble_names.end());
  std::vector<Job> jobs;
  const auto seeds = split_seeds(options);
  for (const auto& t : tables) {
    for (const auto& [label, spec] : methods) {
      for (auto s : seeds) jobs.push_back({&t, label, spec, options.base, s});
    }
  }
  report.cells = run_jobs(jobs, options);
  return report;
}

BenchSummary bench_summary(const ExperimentReport& report) {
  BenchSummary out;
  bool regression = false, classification = false;
  for (const auto& c : report.cells) {
    if (c.failed) continue;
    regression |= c.metrics.contains("r2");
    classification |= c.metrics.contains("accuracy");
  }
  if (regression && classification) throw Error(ErrorCode::InvalidConfig, "bench summary mixes tasks");
  out.metric = classification ? "accuracy" : "r2";
  std::vector<std::string> methods;
  for (const auto& c : report.cells) {
    if (std::find(methods.begin(), methods.end(), c.method) == methods.end()) methods.push_back(c.method);
  }
  const auto aggs = aggregate(report.cells);
  out.table.methods = methods;
  out.table.repeats = report.options.repeats;
  for (const auto& dataset : datasets_in_order(report.cells)) {
    std::vector<double> means(methods.size(), kNaN), stds(methods.size(), kNaN);
    for (const auto& a : aggs) {
      if (a.dataset != dataset || a.metric != out.metric) continue;
      const auto m = static_cast<std::size_t>(std::find(methods.begin(), methods.end(), a.method) - methods.begin());
      means[m] = a.mean;
      stds[m] = a.std;
    }
    if (std::any_of(means.begin(), means.end(), [](double v) { return std::isnan(v); })) {
      out.incomplete.push_back(dataset);
      continue;
    }
    out.table.datasets.push_back(dataset);
    out.table.mean.push_back(means);
    out.table.std.push_back(stds);
  }
  if (out.table.datasets.empty()) return out;
  if (methods.size() >= 2) out.friedman = friedman_rank(out.table);
  out.p90 = p_at(out.table, 0.90);
  out.p95 = p_at(out.table, 0.95);
  out.p98 = p_at(out.table, 0.98);
  out.pma = pma(out.table);
  out.pma_direct = pma_direct(out.table);
  return out;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const MlrConfig& c) {
  nlohmann::json j;
  j["depth"] = c.depth;
  j["width"] = c.width;
  j["permutations"] = c.permutations;
  j["label_dither"] = c.label_dither;
  j["sigma_struct"] = c.struct_dither;
  j["learning_rate"] = c.learning_rate;
  j["max_iter"] = c.max_iter;
  j["budget_seconds"] = c.budget_seconds;
  j["deterministic"] = !c.enforce_budget;
  j["batch_size"] = c.batch_size ? nlohmann::json(*c.batch_size) : nlohmann::json(nullptr);
  j["validation_fraction"] = c.validation_fraction;
  j["lambda_init"] = c.lambda_init ? nlohmann::json(*c.lambda_init) : nlohmann::json(nullptr);
  j["head"] = c.head == HeadKind::Ridge ? "ridge" : "learned";
  j["ridge_form"] = c.ridge_form == RidgeForm::Auto ? "auto" : c.ridge_form == RidgeForm::Gram ? "gram" : "kernel";
  j["task"] = task_name(c.task);
  return j;
}

nlohmann::json to_json(const ExperimentOptions& o) {
  nlohmann::json j;
  j["model"] = to_json(o.base);
  j["repeats"] = o.repeats;
  j["seed"] = o.seed;
  j["test_fraction"] = o.test_fraction;
  j["workers"] = o.workers;
  j["bag_members"] = o.bag_members;
  j["bagged"] = o.bagged;
  j["fit_on_all"] = o.fit_on_all;
  return j;
}

std::string report_file_name(const std::string& dataset, const std::string& method, std::uint64_t seed) {
  return sanitize(dataset) + "_" + sanitize(method) + "_" + std::to_string(seed) + ".report";
}

std::string aggregate_csv(std::span<const Aggregate> rows) {
  std::string out = "dataset,method,metric,mean,std,n_splits\n";
  for (const auto& a : rows) {
    out += csv_field(a.dataset) + "," + csv_field(a.method) + "," + csv_field(a.metric) + "," + number(a.mean) + "," +
           number(a.std) + "," + std::to_string(a.n_splits) + "\n";
  }
  return out;
}

std::string summary_text(const ExperimentReport& report) {
  std::ostringstream os;
  const bool timed = !deterministic(report.options);
  if (report.kind == "ablate") {
    os << pad("variant", 28) << pad("single R2", 20) << pad("bagged R2", 20) << "splits\n";
    for (const auto& r : ablation_table(report)) {
      os << pad(r.variant, 28) << pad(pm(r.single_mean, r.single_std), 20) << pad(pm(r.bagged_mean, r.bagged_std), 20)
         << r.splits << "\n";
    }
  } else if (report.kind == "sweep") {
    os << pad(report.parameters.at("param").get<std::string>(), 14) << pad("test R2", 20) << pad("valid", 9)
       << pad("best it", 9) << pad("lambda_init", 13) << (timed ? pad("seconds", 9) : "") << "failed\n";
    for (const auto& r : sweep_table(report)) {
      os << pad(number(r.value), 14) << pad(pm(r.test_r2, r.test_r2_std), 20) << pad(fmt("%.3f", r.validation), 9)
         << pad(fmt("%.1f", r.best_iteration), 9) << pad(fmt("%.4g", r.lambda_init), 13)
         << (timed ? pad(fmt("%.2f", r.seconds), 9) : "") << r.failures << "/" << r.cells << "\n";
    }
  } else if (report.kind == "bench") {
    const auto s = bench_summary(report);
    os << pad("dataset", 24);
    for (const auto& m : s.table.methods) os << pad(m, 20);
    os << "\n";
    for (std::size_t d = 0; d < s.table.datasets.size(); ++d) {
      os << pad(s.table.datasets[d], 24);
      for (std::size_t m = 0; m < s.table.methods.size(); ++m) os << pad(pm(s.table.mean[d][m], s.table.std[d][m]), 20);
      os << "\n";
    }
    auto line = [&](const std::string& label, const std::vector<double>& v) {
      if (v.empty()) return;
      os << pad(label, 24);
      for (double x : v) os << pad(fmt("%.3f", x), 20);
      os << "\n";
    };
    line("Friedman rank", s.friedman);
    line("P90", s.p90);
    line("P95", s.p95);
    line("P98", s.p98);
    line("PMA", s.pma.value);
    line("PMA (no exclusion)", s.pma_direct);
    if (s.pma.excluded) os << "PMA excludes " << s.pma.excluded << " dataset(s) with a non-positive best score\n";
    for (const auto& d : s.incomplete) os << "left out (missing scores): " << d << "\n";
  }
  std::size_t failed = 0;
  for (const auto& c : report.cells) failed += c.failed;
  if (failed) os << failed << " of " << report.cells.size() << " cells failed; see the .report files\n";
  return os.str();
}

void write_reports(const ExperimentReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());
  const bool timed = !deterministic(report.options);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream f(fs::path(dir) / name, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + (fs::path(dir) / name).string());
    f << text;
  };

  const auto aggs = aggregate(report.cells);
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& c : report.cells) {
    const auto key = std::make_pair(c.dataset, c.method);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& [dataset, method] : keys) {
    nlohmann::json j;
    j["kind"] = report.kind;
    j["dataset"] = dataset;
    j["method"] = method;
    j["seed"] = report.options.seed;
    j["config"] = to_json(report.options);
    j["parameters"] = report.parameters;
    nlohmann::json splits = nlohmann::json::array();
    for (const auto& c : report.cells) {
      if (c.dataset != dataset || c.method != method) continue;
      nlohmann::json s;
      s["split_seed"] = c.split_seed;
      s["model_seed"] = model_seed(c.split_seed);
      s["failed"] = c.failed;
      if (c.failed) {
        s["error"] = c.error;
      } else {
        s["metrics"] = c.metrics;
        s["validation_score"] = c.validation_score;
        s["best_iteration"] = c.best_iteration;
        s["lambda_init"] = c.lambda_init;
      }
      if (timed) s["seconds"] = c.seconds;
      splits.push_back(s);
    }
    j["splits"] = splits;
    nlohmann::json agg = nlohmann::json::array();
    for (const auto& a : aggs) {
      if (a.dataset != dataset || a.method != method) continue;
      agg.push_back({{"metric", a.metric}, {"mean", a.mean}, {"std", a.std}, {"n_splits", a.n_splits}});
    }
    j["aggregates"] = agg;
    write(report_file_name(dataset, method, report.options.seed), j.dump(2) + "\n");
  }
  write("aggregate.csv", aggregate_csv(aggs));
  write("summary.txt", summary_text(report));
}

}  // namespace mlr
