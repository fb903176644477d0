#include <doctest.h>

#include <cmath>
#include <random>

#include "mlr/metrics.hpp"
#include "oracles.hpp"

using namespace mlr;

TEST_CASE("r2") {
  const std::vector<Real> y = {1, 2, 3, 4};
  CHECK(r2_score(y, y) == 1);
  CHECK(r2_score(y, std::vector<Real>(4, 2.5)) == 0);
  // SS_res = 2.5 against SS_tot = 5.
  CHECK(r2_score(y, std::vector<Real>{2, 1, 3.5, 3.5}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r2_score(y, std::vector<Real>{2, 1, 4, 3.5}) == doctest::Approx(1 - 3.25 / 5).epsilon(1e-15));
  CHECK(r2_score(y, std::vector<Real>{1.5, 2.5, 2.5, 3.5}) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(r2_score(std::vector<Real>{0, 2}, std::vector<Real>{std::sqrt(0.5), 2 - std::sqrt(0.5)}) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(r2_score(std::vector<Real>{3, 3}, std::vector<Real>{1, 2}), Error);
  CHECK_THROWS_AS(r2_score(y, std::vector<Real>{1}), Error);
}

TEST_CASE("auc against pair counting") {
  std::mt19937_64 gen(4);
  std::uniform_int_distribution<int> coarse(0, 5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + trial;
    std::vector<double> y(n), s(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = i < 2 ? static_cast<double>(i) : coarse(gen) % 2;
      s[i] = trial % 2 ? coarse(gen) : std::normal_distribution<double>()(gen);
    }
    std::vector<Real> yr(y.begin(), y.end()), sr(s.begin(), s.end());
    CHECK(auc_score(yr, sr) == doctest::Approx(oracle::pair_auc(y, s)).epsilon(1e-13));
  }
  CHECK(auc_score(std::vector<Real>{0, 1}, std::vector<Real>{2, 2}) == 0.5);
  CHECK_THROWS_AS(auc_score(std::vector<Real>{1, 1}, std::vector<Real>{0, 1}), Error);
  CHECK_THROWS_AS(auc_score(std::vector<Real>{1, 2}, std::vector<Real>{0, 1}), Error);
}

TEST_CASE("accuracy, rmse and bce") {
  CHECK(accuracy(std::vector<Real>{1, 0, 1, 1}, std::vector<Real>{1, 1, 1, 0}) == 0.5);
  CHECK(rmse(std::vector<Real>{0, 0}, std::vector<Real>{3, 4}) == doctest::Approx(std::sqrt(12.5)));
  const double z = 1.7;
  const double expect = (std::log(1 + std::exp(-z)) + std::log(1 + std::exp(z))) / 2;
  CHECK(bce_logits(std::vector<Real>{1, 0}, std::vector<Real>{z, z}) == doctest::Approx(expect).epsilon(1e-14));
  // Large logits stay finite.
  CHECK(bce_logits(std::vector<Real>{0}, std::vector<Real>{800}) == doctest::Approx(800));
  CHECK(mean_of(std::vector<double>{1, 2, 6}) == 3);
  CHECK(std_of(std::vector<double>{1, 2, 6}) == doctest::Approx(std::sqrt(7.0)));
  CHECK(std_of(std::vector<double>{4}) == 0);
}

TEST_CASE("friedman rank, P and PMA on a hand table") {
  ScoreTable t;
  t.datasets = {"d1", "d2", "d3"};
  t.methods = {"A", "B", "C"};
  t.mean = {{0.9, 0.8, 0.8}, {0.5, 1.0, 0.2}, {-0.2, -0.4, -0.1}};
  t.repeats = 1;
  // Ranks: d1 A=1 B=C=2.5; d2 B=1 A=2 C=3; d3 C=1 A=2 B=3.
  const auto fr = friedman_rank(t);
  CHECK(fr[0] == doctest::Approx(5.0 / 3));
  CHECK(fr[1] == doctest::Approx(6.5 / 3));
  CHECK(fr[2] == doctest::Approx(6.5 / 3));
  // Thresholds 0.81, 0.9 and -0.09; on d3 even the best score misses.
  const auto p90 = p_at(t, 0.9);
  CHECK(p90[0] == doctest::Approx(1.0 / 3));
  CHECK(p90[1] == doctest::Approx(1.0 / 3));
  CHECK(p90[2] == 0);
  CHECK(p_at(t, 0.5)[0] == doctest::Approx(2.0 / 3));
  const auto p = pma(t);
  CHECK(p.excluded == 1);
  CHECK(p.value[0] == doctest::Approx((1.0 + 0.5) / 2));
  CHECK(p.value[1] == doctest::Approx((0.8 / 0.9 + 1.0) / 2));
  CHECK(p.value[2] == doctest::Approx((0.8 / 0.9 + 0.2) / 2));
  const auto direct = pma_direct(t);
  CHECK(direct[0] == doctest::Approx((1.0 + 0.5 + 2.0) / 3));
  CHECK(direct[2] == doctest::Approx((0.8 / 0.9 + 0.2 + 1.0) / 3));
  t.mean.pop_back();
  CHECK_THROWS_AS(friedman_rank(t), Error);
}
