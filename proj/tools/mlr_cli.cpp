#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mlr/data.hpp"
#include "mlr/ensemble.hpp"
#include "mlr/experiments.hpp"
#include "mlr/metrics.hpp"
#include "mlr/model_io.hpp"

namespace fs = std::filesystem;
using namespace mlr;

namespace {

constexpr int kExitData = 2;
constexpr int kExitTraining = 3;
constexpr int kExitConfig = 4;

struct Options {
  std::vector<std::string> data;
  std::string schema;
  std::string task;
  int depth = 2;
  std::optional<std::size_t> width;
  std::optional<std::size_t> permutations;
  std::optional<double> sigma_struct;
  std::optional<double> label_dither;
  std::optional<double> budget_seconds;
  std::optional<std::size_t> batch_size;
  bool deterministic = false;
  std::uint64_t seed = 0;
  std::vector<std::string> ensemble;
  std::string out = "mlr_out";
  std::size_t workers = 1;
  double test_fraction = 0.2;
  bool fit_on_all = false;

  // experiments
  std::size_t repeats = 20;
  std::size_t splits = 10;
  std::size_t bag_members = 10;
  bool no_bagging = false;
  std::size_t synthetic_n = 100;
  std::size_t synthetic_d = 8;
  std::string param;
  std::vector<double> grid;

  // predict
  std::string model;
};

void add_model_flags(CLI::App* app, Options& o) {
  app->add_option("--schema", o.schema, "JSON sidecar pinning the target and column kinds");
  app->add_option("--task", o.task, "reg or clf (default: schema, else reg)")->check(CLI::IsMember({"reg", "clf"}));
  app->add_option("--depth", o.depth, "L in {1,2,3,4}")->check(CLI::Range(1, 4));
  app->add_option("--width", o.width, "hidden width J (default 1024)");
  app->add_option("--permutations", o.permutations, "T, permuted label copies (default 16)");
  app->add_option("--sigma-struct", o.sigma_struct, "structured dithering scale (default 1)");
  app->add_option("--label-dither", o.label_dither, "label noise scale (default 0.03 for reg, 0 for clf)");
  app->add_option("--batch-size", o.batch_size, "batch size (default min(n, J))");
  app->add_option("--budget-seconds", o.budget_seconds, "wall-clock budget per network (default 300)");
  app->add_flag("--deterministic", o.deterministic, "disable the wall-clock budget");
  app->add_option("--seed", o.seed, "master seed")->envname("MLR_SEED");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--workers", o.workers, "concurrent training jobs")->check(CLI::PositiveNumber);
  app->add_option("--test-fraction", o.test_fraction, "held-out share of each split")->check(CLI::Range(0.0, 0.9));
  app->add_flag("--fit-on-all", o.fit_on_all, "fit the transform on all rows before splitting");
}

MlrConfig model_config(const Options& o, TaskKind task) {
  MlrConfig c = MlrConfig::for_depth(o.depth, task);
  if (o.width) c.width = *o.width;
  if (o.permutations) c.permutations = *o.permutations;
  if (o.sigma_struct) c.struct_dither = *o.sigma_struct;
  if (o.label_dither) c.label_dither = *o.label_dither;
  if (o.budget_seconds) c.budget_seconds = *o.budget_seconds;
  if (o.batch_size) c.batch_size = *o.batch_size;
  c.enforce_budget = !o.deterministic;
  c.validate();
  return c;
}

std::optional<TaskKind> task_flag(const Options& o) {
  if (o.task == "reg") return TaskKind::Regression;
  if (o.task == "clf") return TaskKind::Classification;
  return std::nullopt;
}

Schema schema_of(const Options& o) { return o.schema.empty() ? Schema{} : load_schema(o.schema); }

NamedTable load_named(const std::string& path, const Schema& schema, const Options& o) {
  NamedTable t;
  t.name = fs::path(path).stem().string();
  t.table = load_csv(path, schema);
  t.task = task_flag(o).value_or(schema.task.value_or(TaskKind::Regression));
  return t;
}

std::vector<NamedTable> experiment_tables(const Options& o) {
  if (o.data.empty()) {
    auto suite = synthetic_suite(o.synthetic_n, o.synthetic_d);
    if (task_flag(o) == TaskKind::Classification) {
      throw Error(ErrorCode::InvalidConfig, "the synthetic suite is regression only");
    }
    return suite;
  }
  const Schema schema = schema_of(o);
  std::vector<NamedTable> out;
  for (const auto& path : o.data) out.push_back(load_named(path, schema, o));
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  f << text;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());
}

nlohmann::json echo(const std::string& command, const Options& o, const MlrConfig& config) {
  nlohmann::json j;
  j["command"] = command;
  j["data"] = o.data;
  j["schema"] = o.schema;
  j["model_config"] = to_json(config);
  j["ensemble"] = o.ensemble;
  j["seed"] = o.seed;
  j["out"] = o.out;
  j["workers"] = o.workers;
  j["test_fraction"] = o.test_fraction;
  j["fit_on_all"] = o.fit_on_all;
  return j;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int cmd_train(const Options& o) {
  if (o.data.size() != 1) throw Error(ErrorCode::InvalidConfig, "train needs exactly one --data file");
  const std::string ens_name = o.ensemble.empty() ? "single" : o.ensemble.front();
  const Schema schema = schema_of(o);
  const NamedTable data = load_named(o.data.front(), schema, o);
  const MlrConfig config = model_config(o, data.task);
  const EnsembleSpec spec = EnsembleSpec::parse(ens_name, config.depth);
  const std::string method = method_label(ens_name, config.depth);

  Dataset train_part;
  std::optional<Dataset> test_part;
  if (o.test_fraction > 0) {
    auto split = train_test_split(data.table, data.task, o.test_fraction, o.seed, o.fit_on_all);
    train_part = std::move(split.train);
    test_part = std::move(split.test);
  } else {
    train_part = preprocess(data.table, data.task);
  }

  const auto ens = train_ensemble(spec, config, train_part.x, train_part.y, model_seed(o.seed), o.workers);
  const SavedModel model = saved_model_from(ens, train_part.transform);

  ensure_dir(o.out);
  const auto model_path = fs::path(o.out) / (data.name + "_" + method + "_" + std::to_string(o.seed) + ".mlr");
  save_model(model, model_path.string());

  nlohmann::json report;
  report["kind"] = "train";
  report["dataset"] = data.name;
  report["method"] = method;
  report["seed"] = o.seed;
  report["model_seed"] = model_seed(o.seed);
  report["config"] = echo("train", o, config);
  report["model_file"] = model_path.filename().string();
  report["train_rows"] = train_part.rows.size();
  report["features"] = train_part.x.cols();
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : ens.members) {
    nlohmann::json mj;
    mj["seed"] = m.seed;
    mj["depth"] = m.depth;
    mj["failed"] = m.failed;
    if (m.failed) {
      mj["error"] = m.error;
    } else {
      const auto& r = m.result.record;
      mj["best_iteration"] = r.best_iteration;
      mj["best_validation_score"] = r.best_validation_score;
      mj["iterations"] = r.iterations;
      mj["skipped_updates"] = r.skipped_updates;
      mj["lambda_init"] = r.lambda_init.lambda;
      mj["final_lambda"] = r.final_lambda;
      mj["batch_size"] = r.batch_size;
      if (!o.deterministic) mj["budget_exhausted"] = r.budget_exhausted;
    }
    members.push_back(mj);
  }
  report["members"] = members;

  if (test_part) {
    report["test_rows"] = test_part->rows.size();
    const Matrix pred = model.predict(test_part->x);
    nlohmann::json metrics;
    if (data.task == TaskKind::Regression) {
      metrics["r2"] = r2_score(test_part->y.flat(), pred.flat());
      std::vector<Real> a(pred.size()), b(pred.size());
      for (std::size_t i = 0; i < pred.size(); ++i) {
        a[i] = static_cast<Real>(inverse_target(model.transform, test_part->y[i]));
        b[i] = static_cast<Real>(inverse_target(model.transform, pred[i]));
      }
      metrics["rmse"] = rmse(a, b);
    } else {
      std::vector<Real> labels(pred.size());
      for (std::size_t i = 0; i < pred.size(); ++i) labels[i] = pred[i] > Real(0.5) ? 1 : 0;
      metrics["accuracy"] = accuracy(test_part->y.flat(), labels);
      try {
        metrics["auc"] = auc_score(test_part->y.flat(), pred.flat());
      } catch (const Error&) {
        metrics["auc"] = nullptr;  // single-class test split
      }
    }
    report["test_metrics"] = metrics;
    std::cout << data.name << " " << method << " test";
    for (const auto& [k, v] : metrics.items()) std::cout << " " << k << "=" << v.dump();
    std::cout << "\n";
  }
  write_text(fs::path(o.out) / report_file_name(data.name, method, o.seed), report.dump(2) + "\n");
  write_text(fs::path(o.out) / "config.json", echo("train", o, config).dump(2) + "\n");
  std::cout << "model written to " << model_path.string() << "\n";
  return 0;
}

int cmd_predict(const Options& o) {
  if (o.data.size() != 1) throw Error(ErrorCode::InvalidConfig, "predict needs exactly one --data file");
  const SavedModel model = load_model(o.model);
  const auto& t = model.transform;
  // Column kinds come from the stored transform so the file is read the way
  // the training file was.
  Schema schema;
  for (const auto& f : t.features) schema.kinds[f.name] = f.numeric_source ? ColumnKind::Numeric : ColumnKind::Categorical;
  const RawTable table = load_csv(o.data.front(), schema);
  std::vector<std::size_t> rows(table.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const Matrix pred = model.predict(transform_features(t, table, rows));

  std::string text = model.task == TaskKind::Regression ? "prediction\n" : "label,probability\n";
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (model.task == TaskKind::Regression) {
      text += num(inverse_target(t, pred[i])) + "\n";
    } else {
      text += t.class_labels.at(pred[i] > Real(0.5) ? 1 : 0) + "," + num(pred[i]) + "\n";
    }
  }
  if (o.out.empty() || o.out == "-") {
    std::cout << text;
  } else {
    write_text(o.out, text);
  }
  return 0;
}

ExperimentOptions experiment_options(const Options& o, std::size_t repeats, TaskKind task) {
  ExperimentOptions e;
  e.base = model_config(o, task);
  e.repeats = repeats;
  e.seed = o.seed;
  e.test_fraction = o.test_fraction;
  e.workers = o.workers;
  e.bag_members = o.bag_members;
  e.bagged = !o.no_bagging;
  e.fit_on_all = o.fit_on_all;
  if (!(e.test_fraction > 0)) throw Error(ErrorCode::InvalidConfig, "experiments need --test-fraction > 0");
  if (repeats == 0) throw Error(ErrorCode::InvalidConfig, "at least one split is required");
  return e;
}

int finish(const std::string& command, const Options& o, const ExperimentReport& report) {
  write_reports(report, o.out);
  nlohmann::json j = echo(command, o, report.options.base);
  j["experiment"] = to_json(report.options);
  j["parameters"] = report.parameters;
  write_text(fs::path(o.out) / "config.json", j.dump(2) + "\n");
  std::cout << summary_text(report);
  return 0;
}

TaskKind common_task(const std::vector<NamedTable>& tables) {
  const TaskKind t = tables.front().task;
  for (const auto& x : tables) {
    if (x.task != t) throw Error(ErrorCode::InvalidConfig, "all datasets of one run must share a task");
  }
  return t;
}

int cmd_ablate(const Options& o) {
  const auto tables = experiment_tables(o);
  const auto options = experiment_options(o, o.repeats, common_task(tables));
  return finish("ablate", o, run_ablation(tables, options));
}

int cmd_sweep(const Options& o) {
  const auto tables = experiment_tables(o);
  const auto options = experiment_options(o, o.repeats, common_task(tables));
  return finish("sweep", o, run_sweep(parse_sweep_param(o.param), o.grid, tables, options));
}

int cmd_bench(const Options& o) {
  const auto tables = experiment_tables(o);
  const auto options = experiment_options(o, o.splits, common_task(tables));
  const std::vector<std::string> methods = o.ensemble.empty() ? std::vector<std::string>{"single", "bag"} : o.ensemble;
  return finish("bench", o, run_bench(tables, methods, options));
}

int exit_code(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::Data: return kExitData;
    case ErrorCategory::Training: return kExitTraining;
    case ErrorCategory::Config: return kExitConfig;
  }
  return kExitTraining;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ridge-headed networks trained against permuted labels"};
  app.require_subcommand(1);
  Options o;
  const std::vector<std::string> ensembles = {"single", "bag", "bag1", "bag2", "bag3", "bag4", "ens", "best", "top5"};

  auto* train = app.add_subcommand("train", "train on a CSV file and score a held-out split");
  train->add_option("--data", o.data, "training CSV")->required();
  train->add_option("--ensemble", o.ensemble, "single, bag1..bag4, ens, best or top5")
      ->expected(1)
      ->check(CLI::IsMember(ensembles));
  add_model_flags(train, o);

  auto* predict = app.add_subcommand("predict", "write predictions for a CSV file");
  predict->add_option("--model", o.model, "model file written by train")->required();
  predict->add_option("--data", o.data, "CSV with the training feature columns")->required();
  predict->add_option("--out", o.out, "predictions CSV (default: stdout)");

  auto add_experiment_flags = [&](CLI::App* cmd) {
    cmd->add_option("--data", o.data, "CSV files, comma separated (default: the synthetic suite)")
        ->delimiter(',');
    cmd->add_option("--synthetic-n", o.synthetic_n, "rows per synthetic task");
    cmd->add_option("--synthetic-d", o.synthetic_d, "features per synthetic task");
    add_model_flags(cmd, o);
  };

  auto* ablate = app.add_subcommand("ablate", "five-row ablation, single and bagged");
  add_experiment_flags(ablate);
  ablate->add_option("--repeats", o.repeats, "random 80:20 splits");
  ablate->add_option("--bag-members", o.bag_members, "networks per bagged model")->check(CLI::PositiveNumber);
  ablate->add_flag("--no-bagging", o.no_bagging, "skip the bagged column");

  auto* sweep = app.add_subcommand("sweep", "vary one hyperparameter over a grid");
  add_experiment_flags(sweep);
  sweep->add_option("--param", o.param, "sigma_struct, T, lambda_init, label_dither, J, batch_size or L")->required();
  sweep->add_option("--grid", o.grid, "comma separated values")->required()->delimiter(',');
  sweep->add_option("--repeats", o.repeats, "random 80:20 splits");

  auto* bench = app.add_subcommand("bench", "datasets x methods x split seeds with rank statistics");
  add_experiment_flags(bench);
  bench->add_option("--splits", o.splits, "split seeds seed..seed+splits-1");
  bench->add_option("--ensemble", o.ensemble, "methods, comma separated")->delimiter(',')->check(CLI::IsMember(ensembles));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*train) return cmd_train(o);
    if (*predict) {
      if (predict->count("--out") == 0) o.out.clear();
      return cmd_predict(o);
    }
    if (*ablate) return cmd_ablate(o);
    if (*sweep) return cmd_sweep(o);
    if (*bench) return cmd_bench(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTraining;
  }
  return kExitConfig;
}
