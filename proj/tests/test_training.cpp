#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "mlr/synthetic.hpp"
#include "mlr/training.hpp"
#include "oracles.hpp"

using namespace mlr;

namespace {

MlrConfig small_config(std::size_t iters = 12) {
  MlrConfig c = MlrConfig::for_depth(2);
  c.width = 16;
  c.permutations = 4;
  c.max_iter = iters;
  c.enforce_budget = false;
  return c;
}

SyntheticData data(std::size_t n = 40) { return make_synthetic(SyntheticKind::Additive, n, 4, 3); }

}  // namespace

TEST_CASE("adam matches a hand computation") {
  std::vector<Real> p = {1.0, -2.0};
  std::vector<std::span<Real>> views = {std::span<Real>(p)};
  AdamState st;
  st.first = {Matrix(1, 2)};
  st.second = {Matrix(1, 2)};
  const std::vector<Matrix> g1 = {Matrix::from_rows({{0.5, -4.0}})};
  adam_step(views, g1, st, 0.1);
  // Step 1: m_hat = g, v_hat = g^2, so each weight moves by lr * sign(g).
  CHECK(p[0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(-2.0 + 0.1 * 4.0 / (4.0 + 1e-8)).epsilon(1e-15));
  const std::vector<Matrix> g2 = {Matrix::from_rows({{1.0, 0.0}})};
  const double p0 = p[0];
  adam_step(views, g2, st, 0.1);
  const double m = 0.9 * 0.05 + 0.1 * 1.0, v = 0.999 * 0.00025 + 0.001 * 1.0;
  const double mh = m / (1 - 0.81), vh = v / (1 - 0.999 * 0.999);
  CHECK(p[0] == doctest::Approx(p0 - 0.1 * mh / (std::sqrt(vh) + 1e-8)).epsilon(1e-14));
  CHECK(st.step == 2);
  const std::vector<Matrix> bad = {Matrix::from_rows({{NAN, 0.0}})};
  const auto before = p;
  CHECK_THROWS_AS(adam_step(views, bad, st, 0.1), Error);
  CHECK(p == before);
  CHECK(st.step == 2);
}

TEST_CASE("validation split sizes and disjointness") {
  const auto s = split_validation(23, 0.2, 7);
  CHECK(s.validation.size() == 4);
  CHECK(s.train.size() == 19);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.validation.begin(), s.validation.end());
  CHECK(all.size() == 23);
  CHECK(std::is_sorted(s.train.begin(), s.train.end()));
  CHECK(split_validation(23, 0.2, 7).validation == s.validation);
  CHECK(split_validation(5, 0.01, 1).validation.size() == 1);
  CHECK_THROWS_AS(split_validation(4, 0.2, 1), Error);
}

TEST_CASE("validation score") {
  const Matrix y = Matrix::column({1, 2, 3, 4});
  CHECK(validation_score(TaskKind::Regression, y, y) == 1);
  CHECK(validation_score(TaskKind::Regression, y, Matrix(4, 1, 2.5)) == 0);
  CHECK(validation_score(TaskKind::Regression, Matrix(2, 1, 1), Matrix::column({0, 1})) == -0.5);
  const Matrix c = Matrix::column({1, 0, 1, 0});
  CHECK(validation_score(TaskKind::Classification, c, Matrix::column({0.3, -1, -0.2, 0})) == 0.75);
}

TEST_CASE("training is deterministic and logs every iteration") {
  const auto d = data();
  const auto a = train(small_config(), d.x, d.y, 5);
  const auto b = train(small_config(), d.x, d.y, 5);
  CHECK(a.model == b.model);
  auto ra = a.record, rb = b.record;
  for (auto* r : {&ra, &rb}) {
    for (auto& l : r->log) l.seconds = 0;
    r->log[0].train_loss = 0;
  }
  CHECK(ra == rb);
  CHECK(a.record.log.size() == 13);
  CHECK(a.record.iterations == 12);
  CHECK(std::isnan(a.record.log[0].train_loss));
  for (std::size_t i = 1; i < a.record.log.size(); ++i) CHECK(std::isfinite(a.record.log[i].train_loss));
  CHECK(a.record.batch_size == 16);
  CHECK(a.record.lambda_init.losses.size() == 12);
  const auto c = train(small_config(), d.x, d.y, 6);
  CHECK_FALSE(c.model == a.model);
}

TEST_CASE("the returned model is the best validation checkpoint") {
  const auto d = data(60);
  auto cfg = small_config(40);
  cfg.learning_rate = 1e-2;
  const auto full = train(cfg, d.x, d.y, 9);
  double best = -1e300;
  std::size_t arg = 0;
  for (const auto& l : full.record.log)
    if (l.iteration == 0 || l.validation_score > best) best = l.validation_score, arg = l.iteration;
  CHECK(full.record.best_iteration == arg);
  CHECK(full.record.best_validation_score == best);
  // Stopping at the best iteration must reproduce the same parameters bit for bit.
  cfg.max_iter = arg;
  const auto cut = train(cfg, d.x, d.y, 9);
  CHECK(cut.model == full.model);
  const Matrix xv = select_rows(d.x, full.record.split.validation);
  CHECK(full.model.predict(xv) == full.record.best_validation_predictions);
  CHECK(full.record.final_lambda == full.model.params.lambda());
}

TEST_CASE("batches come from the training rows") {
  const auto d = data(50);
  auto cfg = small_config(9);
  cfg.batch_size = 8;
  std::vector<std::vector<std::size_t>> seen;
  const auto r = train(cfg, d.x, d.y, 2, [&](std::size_t, std::span<const std::size_t> rows) {
    seen.emplace_back(rows.begin(), rows.end());
  });
  REQUIRE(seen.size() == 9);
  const std::set<std::size_t> val(r.record.split.validation.begin(), r.record.split.validation.end());
  for (const auto& rows : seen) {
    CHECK(rows.size() == 8);
    CHECK(std::set<std::size_t>(rows.begin(), rows.end()).size() == 8);
    for (auto i : rows) CHECK(val.count(i) == 0);
  }
  // 40 training rows make five disjoint batches per epoch.
  std::set<std::size_t> epoch;
  for (std::size_t b = 0; b < 5; ++b) epoch.insert(seen[b].begin(), seen[b].end());
  CHECK(epoch.size() == 40);
}

TEST_CASE("given lambda bypasses the grid and a learned head trains") {
  const auto d = data();
  auto cfg = small_config(3);
  cfg.lambda_init = 2.5;
  const auto r = train(cfg, d.x, d.y, 1);
  CHECK(r.record.lambda_init.lambda == 2.5);
  CHECK(r.record.lambda_init.losses.empty());
  cfg = small_config(3);
  cfg.head = HeadKind::Learned;
  cfg.permutations = 0;
  const auto l = train(cfg, d.x, d.y, 1);
  CHECK(l.model.head == HeadKind::Learned);
  CHECK(l.model.output_weights.rows() == 16);
}

TEST_CASE("a spent budget stops before the first update") {
  const auto d = data();
  auto cfg = small_config(50);
  cfg.enforce_budget = true;
  cfg.budget_seconds = 0;
  const auto r = train(cfg, d.x, d.y, 1);
  CHECK(r.record.budget_exhausted);
  CHECK(r.record.iterations == 0);
  CHECK(r.record.log.size() == 1);
}

TEST_CASE("bad training input") {
  const auto d = data();
  Matrix x = d.x;
  x(0, 0) = NAN;
  CHECK_THROWS_AS(train(small_config(), x, d.y, 1), Error);
  CHECK_THROWS_AS(train(small_config(), d.x, Matrix(3, 1), 1), Error);
}
