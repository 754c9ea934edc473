// SPDX-License-Identifier: Apache-2.0
#include "noisylab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "noisylab/rng.hpp"

using namespace noisylab;

namespace {

// Independent route: per-class index sets instead of confusion counting.
double brute_force_macro_f1(const std::vector<int>& pred, const std::vector<int>& gold, int k) {
  double sum = 0.0;
  for (int c = 0; c < k; ++c) {
    std::set<std::size_t> predicted, actual;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (pred[i] == c) predicted.insert(i);
      if (gold[i] == c) actual.insert(i);
    }
    std::set<std::size_t> both;
    std::set_intersection(predicted.begin(), predicted.end(), actual.begin(), actual.end(),
                          std::inserter(both, both.begin()));
    const double p = predicted.empty() ? 0.0
                                       : static_cast<double>(both.size()) /
                                             static_cast<double>(predicted.size());
    const double r =
        actual.empty() ? 0.0 : static_cast<double>(both.size()) / static_cast<double>(actual.size());
    sum += p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
  return sum / static_cast<double>(k);
}

}  // namespace

TEST_CASE("macro_f1 basics") {
  CHECK(macro_f1({0, 1, 2}, {0, 1, 2}, 3).macro_f1 == doctest::Approx(1.0));

  // gold (A,A,B,B), pred (A,B,B,B): F1_A = 2/3, F1_B = 0.8, macro = 0.7333...
  const EvalReport r = macro_f1({0, 1, 1, 1}, {0, 0, 1, 1}, 2);
  CHECK(r.per_class_f1[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(r.per_class_f1[1] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(r.macro_f1 == doctest::Approx(0.73333333).epsilon(1e-6));
  CHECK(r.support == std::vector<std::size_t>{2, 2});

  // everything predicted as one class on balanced gold: mean(2/3, 0) = 1/3
  const EvalReport one_sided = macro_f1({0, 0, 0, 0}, {0, 0, 1, 1}, 2);
  CHECK(one_sided.macro_f1 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  CHECK_THROWS_AS(macro_f1({0, 1}, {0}, 2), Error);
  CHECK_THROWS_AS(macro_f1({}, {}, 2), Error);
  CHECK_THROWS_AS(macro_f1({5}, {0}, 2), Error);
}

TEST_CASE("macro_f1 zero-support classes can be counted or excluded") {
  // class 2 never appears; it contributes F1 = 0 by default
  const EvalReport with = macro_f1({0, 1}, {0, 1}, 3, true);
  CHECK(with.macro_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  const EvalReport without = macro_f1({0, 1}, {0, 1}, 3, false);
  CHECK(without.macro_f1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(with.config_fingerprint != without.config_fingerprint);
}

TEST_CASE("macro_f1 matches the brute-force oracle on 1000 random instances") {
  for (std::uint64_t trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng::chain(trial, 0) % 40;
    std::vector<int> pred(n), gold(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = static_cast<int>(rng::chain(trial, i, 1) % 5);
      gold[i] = static_cast<int>(rng::chain(trial, i, 2) % 5);
    }
    const double lib = macro_f1(pred, gold, 5).macro_f1;
    const double oracle = brute_force_macro_f1(pred, gold, 5);
    CHECK(std::abs(lib - oracle) < 1e-12);
  }
}

TEST_CASE("macro_f1 is invariant under joint permutation") {
  std::vector<int> pred = {0, 1, 2, 2, 1, 0, 1, 3, 4, 0};
  std::vector<int> gold = {0, 2, 2, 2, 1, 1, 1, 3, 3, 0};
  const double before = macro_f1(pred, gold, 5).macro_f1;
  for (std::uint64_t round = 0; round < 20; ++round) {
    for (std::size_t i = pred.size(); i > 1; --i) {
      const std::size_t j = rng::chain(round, i) % i;
      std::swap(pred[i - 1], pred[j]);
      std::swap(gold[i - 1], gold[j]);
    }
    CHECK(macro_f1(pred, gold, 5).macro_f1 == doctest::Approx(before).epsilon(1e-15));
  }
}

TEST_CASE("recompute_api reproduces printed aggregate improvements") {
  CHECK(recompute_api({0.5, 0.7}, {0.5, 0.7}) == doctest::Approx(0.0));

  const std::vector<double> base_04 = {0.55, 0.68, 0.59, 0.71, 0.59, 0.77};
  const std::vector<double> den_04 = {0.67, 0.71, 0.66, 0.87, 0.62, 0.86};
  CHECK(std::abs(recompute_api(base_04, den_04) - 12.9) <= 0.3);

  const std::vector<double> base_02 = {0.74, 0.86, 0.72, 0.89, 0.74, 0.90};
  const std::vector<double> seal_02 = {0.81, 0.88, 0.78, 0.94, 0.73, 0.94};
  CHECK(std::abs(recompute_api(base_02, seal_02) - 4.8) <= 0.3);

  CHECK_THROWS_AS(recompute_api({0.5}, {0.5, 0.6}), Error);
  CHECK_THROWS_AS(recompute_api({0.0, 0.5}, {0.1, 0.6}), Error);
  CHECK_THROWS_AS(recompute_api({}, {}), Error);
}

TEST_CASE("build_result_table produces a grid with api rows") {
  std::vector<RunRecord> runs;
  const std::vector<std::string> datasets = {"d1", "d2", "d3"};
  const std::vector<std::string> trainers = {"base", "den", "seal", "plc", "coteaching_plus"};
  double v = 0.50;
  for (const auto& d : datasets)
    for (const auto& t : trainers) runs.push_back({d, "last_epoch", 0.2, t, v += 0.01, 7});

  const ResultTable table = build_result_table(runs);
  REQUIRE(table.groups.size() == 1);
  const auto& g = table.groups[0];
  CHECK(g.noise_method == "last_epoch");
  CHECK(g.datasets == datasets);
  REQUIRE(g.scores.size() == 3);
  for (const auto& row : g.scores)
    for (double score : row) CHECK(!std::isnan(score));

  // api row agrees with a direct recomputation for each column
  for (std::size_t col = 1; col < table.columns.size(); ++col) {
    std::vector<double> base, method;
    for (std::size_t row = 0; row < 3; ++row) {
      base.push_back(g.scores[row][0]);
      method.push_back(g.scores[row][col]);
    }
    CHECK(g.api[col] == doctest::Approx(recompute_api(base, method)).epsilon(1e-12));
  }

  const std::string csv = table.to_csv();
  CHECK(csv.find("last_epoch,0.2,API") != std::string::npos);
  const std::string text = table.to_text();
  CHECK(text.find("== last_epoch @ rate 0.2 ==") != std::string::npos);
}

TEST_CASE("build_result_table single run and missing cells") {
  const ResultTable one = build_result_table({{"toy", "none", 0.0, "base", 0.9, 1}});
  REQUIRE(one.groups.size() == 1);
  CHECK(one.groups[0].scores[0][0] == doctest::Approx(0.9));
  for (std::size_t col = 1; col < one.columns.size(); ++col) {
    CHECK(std::isnan(one.groups[0].scores[0][col]));
    CHECK(std::isnan(one.groups[0].api[col]));
  }
  CHECK(one.to_text().find("—") != std::string::npos);

  // dataset d2 lacks a seal run; the seal api uses only d1
  std::vector<RunRecord> sparse = {
      {"d1", "similarity", 0.4, "base", 0.60, 1},
      {"d1", "similarity", 0.4, "seal", 0.66, 1},
      {"d2", "similarity", 0.4, "base", 0.50, 1},
  };
  const ResultTable table = build_result_table(sparse);
  CHECK(table.groups[0].api[2] == doctest::Approx(10.0).epsilon(1e-9));

  std::vector<RunRecord> dup = sparse;
  dup.push_back({"d1", "similarity", 0.4, "base", 0.61, 2});
  CHECK_THROWS_AS(build_result_table(dup), Error);

  std::vector<RunRecord> unknown = {{"d1", "none", 0.0, "mystery", 0.5, 1}};
  CHECK_THROWS_AS(build_result_table(unknown), Error);
}
