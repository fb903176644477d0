#include <doctest.h>

#include "mlr/ensemble.hpp"
#include "mlr/synthetic.hpp"

using namespace mlr;

namespace {

MlrConfig tiny() {
  MlrConfig c = MlrConfig::for_depth(2);
  c.width = 8;
  c.permutations = 2;
  c.max_iter = 4;
  c.enforce_budget = false;
  return c;
}

}  // namespace

TEST_CASE("spec parsing") {
  CHECK(EnsembleSpec::parse("single", 3).depths == std::vector<int>{3});
  CHECK(EnsembleSpec::parse("bag2", 3).depths == std::vector<int>(10, 2));
  CHECK(EnsembleSpec::parse("bag", 3).kind == EnsembleKind::Bag);
  const auto ens = EnsembleSpec::parse("top5", 1);
  CHECK(ens.kind == EnsembleKind::Top5);
  CHECK(std::count(ens.depths.begin(), ens.depths.end(), 1) == 10);
  CHECK(std::count(ens.depths.begin(), ens.depths.end(), 2) == 10);
  CHECK_THROWS_AS(EnsembleSpec::parse("bag5", 1), Error);
  CHECK_THROWS_AS(EnsembleSpec::parse("forest", 1), Error);
}

TEST_CASE("member selection") {
  const std::vector<double> s = {0.3, 0.9, 0.9, 0.1, 0.5, 0.7, 0.2};
  CHECK(selected_members(s, EnsembleKind::Ens).size() == 7);
  CHECK(selected_members(s, EnsembleKind::Best) == std::vector<std::size_t>{1});
  CHECK(selected_members(s, EnsembleKind::Top5) == std::vector<std::size_t>{1, 2, 5, 4, 0});
  CHECK(selected_members(std::vector<double>{0.4, 0.2}, EnsembleKind::Top5).size() == 2);
  CHECK_THROWS_AS(selected_members(std::vector<double>{}, EnsembleKind::Best), Error);
}

TEST_CASE("aggregation folds") {
  const std::vector<Matrix> p = {Matrix::column({1, 0}), Matrix::column({3, 0}), Matrix::column({-1, 0})};
  const std::vector<double> v = {0.1, 0.5, 0.2};
  CHECK(aggregate_predictions(p, v, EnsembleKind::Bag, TaskKind::Regression) == Matrix::column({1, 0}));
  CHECK(aggregate_predictions(p, v, EnsembleKind::Best, TaskKind::Regression) == Matrix::column({3, 0}));
  const Matrix prob = aggregate_predictions(p, v, EnsembleKind::Ens, TaskKind::Classification);
  CHECK(prob[0] == doctest::Approx((logistic(1) + logistic(3) + logistic(-1)) / 3).epsilon(1e-15));
  CHECK(prob[1] == doctest::Approx(0.5));
  CHECK_THROWS_AS(aggregate_predictions(p, std::vector<double>{1}, EnsembleKind::Bag, TaskKind::Regression), Error);
}

TEST_CASE("training an ensemble does not depend on the worker count") {
  const auto d = make_synthetic(SyntheticKind::Linear, 40, 4, 1);
  const auto spec = EnsembleSpec::bag(2, 4);
  const auto one = train_ensemble(spec, tiny(), d.x, d.y, 100, 1);
  const auto four = train_ensemble(spec, tiny(), d.x, d.y, 100, 4);
  REQUIRE(one.members.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(one.members[i].seed == 100 + i);
    CHECK(one.members[i].result.model == four.members[i].result.model);
  }
  CHECK(ensemble_predict(one, d.x) == ensemble_predict(four, d.x));
  // Members differ because their seeds differ.
  CHECK_FALSE(one.members[0].result.model == one.members[1].result.model);
}

TEST_CASE("pool members use their own depth defaults") {
  const auto d = make_synthetic(SyntheticKind::Linear, 30, 3, 2);
  EnsembleSpec spec{EnsembleKind::Best, {1, 2}};
  const auto e = train_ensemble(spec, tiny(), d.x, d.y, 1);
  CHECK(e.members[0].result.model.params.depth == 1);
  CHECK(e.members[0].result.model.output_weights.rows() == 3);
  CHECK(e.members[1].result.model.params.depth == 2);
}

TEST_CASE("failed members") {
  const auto d = make_synthetic(SyntheticKind::Linear, 4, 3, 2);
  CHECK_THROWS_AS(train_ensemble(EnsembleSpec::bag(2, 3), tiny(), d.x, d.y, 1), Error);
  const auto ok = make_synthetic(SyntheticKind::Linear, 30, 3, 2);
  auto e = train_ensemble(EnsembleSpec::bag(2, 2), tiny(), ok.x, ok.y, 1);
  const Matrix only_second = e.members[1].result.model.predict(ok.x);
  e.members[0].failed = true;
  CHECK(e.healthy() == 1);
  CHECK(ensemble_predict(e, ok.x) == only_second);
  e.members[1].failed = true;
  CHECK_THROWS_AS(ensemble_predict(e, ok.x), Error);
}
