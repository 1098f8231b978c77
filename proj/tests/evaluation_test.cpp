/*
 * Copyright 2026 The nullstat Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>

#include "nullstat/evaluation.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace nullstat {
namespace {

using testing::throws_code;

std::vector<ScoredSample> from_pvalues(const std::vector<double>& real_p, const std::vector<double>& fake_p) {
  std::vector<ScoredSample> out;
  for (std::size_t i = 0; i < real_p.size(); ++i) out.push_back(score_from_pvalue("r" + std::to_string(i), real_p[i], Label::kReal));
  for (std::size_t i = 0; i < fake_p.size(); ++i) out.push_back(score_from_pvalue("f" + std::to_string(i), fake_p[i], Label::kFake));
  return out;
}

std::vector<ScoredSample> convert(const std::vector<oracle::LabeledScore>& xs) {
  std::vector<ScoredSample> out;
  for (const auto& x : xs) out.push_back({x.id, x.score, x.positive ? Label::kFake : Label::kReal});
  return out;
}

TEST(Auc, PerfectSeparation) {
  EXPECT_DOUBLE_EQ(auc(from_pvalues({0.9, 0.8}, {0.1, 0.2})), 1.0);
  EXPECT_DOUBLE_EQ(auc(from_pvalues({0.1, 0.2}, {0.9, 0.8})), 0.0);
}

TEST(Auc, AllTiedIsHalf) {
  EXPECT_DOUBLE_EQ(auc(from_pvalues({0.4, 0.4, 0.4}, {0.4, 0.4})), 0.5);
}

TEST(Auc, UnknownRowsIgnoredAndSingleClassRejected) {
  auto xs = from_pvalues({0.9}, {0.1});
  xs.push_back({"u", 100.0, Label::kUnknown});
  EXPECT_DOUBLE_EQ(auc(xs), 1.0);
  EXPECT_TRUE(throws_code([] { auc(from_pvalues({0.1, 0.2}, {})); }, ErrorCode::kSingleClassInput));
}

TEST(Auc, MatchesPairCountingOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const auto xs = oracle::random_scored(rng, 20);
    EXPECT_EQ(auc(convert(xs)), oracle::pair_count_auc(xs)) << trial;
  }
}

TEST(Ap, Examples) {
  EXPECT_DOUBLE_EQ(average_precision(from_pvalues({0.8, 0.9}, {0.01, 0.02})), 1.0);
  EXPECT_DOUBLE_EQ(average_precision(from_pvalues({0.1, 0.2, 0.3}, {0.9})), 0.25);
  EXPECT_TRUE(throws_code([] { average_precision(from_pvalues({0.1}, {})); }, ErrorCode::kNoPositives));
}

TEST(Ap, TiesRankBySampleId) {
  // Equal scores: "a" ranks before "b".
  std::vector<ScoredSample> xs = {{"b", 0.5, Label::kFake}, {"a", 0.5, Label::kReal}};
  EXPECT_DOUBLE_EQ(average_precision(xs), 0.5);
  xs = {{"a", 0.5, Label::kFake}, {"b", 0.5, Label::kReal}};
  EXPECT_DOUBLE_EQ(average_precision(xs), 1.0);
}

TEST(Ap, MatchesPrecisionSumOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    const auto xs = oracle::random_scored(rng, 2 + trial % 40);
    EXPECT_EQ(average_precision(convert(xs)), oracle::precision_sum_ap(xs)) << trial;
  }
}

TEST(Metrics, InvariantUnderIncreasingTransforms) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.001, 0.999);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ScoredSample> one_minus, negated, logit;
    for (int i = 0; i < 60; ++i) {
      const double p = std::round(unit(rng) * 50) / 50;
      const Label l = (i < 2) ? (i ? Label::kReal : Label::kFake) : (coin(rng) ? Label::kFake : Label::kReal);
      const std::string id = "s" + std::to_string(100 + i);
      one_minus.push_back(score_from_pvalue(id, p, l));
      negated.push_back({id, -p, l});
      logit.push_back({id, std::log((1 - p) / p), l});
    }
    EXPECT_EQ(auc(one_minus), auc(negated));
    EXPECT_EQ(auc(one_minus), auc(logit));
    EXPECT_EQ(average_precision(one_minus), average_precision(negated));
    EXPECT_EQ(average_precision(one_minus), average_precision(logit));
  }
}

TEST(BalancedSplits, EqualClassesPerGenerator) {
  std::vector<ScoredSample> xs;
  std::vector<std::string> gens;
  for (int i = 0; i < 100; ++i) {
    xs.push_back({"r" + std::to_string(i), 0.0, Label::kReal});
    gens.push_back("");
  }
  for (int i = 0; i < 40; ++i) {
    xs.push_back({"f" + std::to_string(i), 1.0, Label::kFake});
    gens.push_back("sd");
  }
  for (int i = 0; i < 150; ++i) {
    xs.push_back({"g" + std::to_string(i), 1.0, Label::kFake});
    gens.push_back("gan");
  }
  const auto a = balanced_splits(xs, gens, 8);
  ASSERT_EQ(a.size(), 2u);
  for (const auto& s : a) {
    std::size_t real = 0, fake = 0;
    for (std::size_t i : s.indices) (xs[i].label == Label::kReal ? real : fake)++;
    const std::size_t want = s.generator == "sd" ? 40 : 100;
    EXPECT_EQ(real, want) << s.generator;
    EXPECT_EQ(fake, want) << s.generator;
  }
  const auto b = balanced_splits(xs, gens, 8);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].indices, b[k].indices);
  EXPECT_NE(balanced_splits(xs, gens, 12)[1].indices, a[1].indices);
}

TEST(MeanStd, Population) {
  const std::vector<double> xs = {1, 2, 3, 4};
  const auto m = mean_std(xs);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_DOUBLE_EQ(m.std, std::sqrt(1.25));
}

TEST(MetricTable, OneGeneratorGivesOneRowPlusSummary) {
  std::vector<ScoredSample> xs;
  std::vector<std::string> gens;
  for (int i = 0; i < 30; ++i) {
    xs.push_back({"r" + std::to_string(i), i / 60.0, Label::kReal});
    gens.push_back("");
    xs.push_back({"f" + std::to_string(i), 0.5 + i / 60.0, Label::kFake});
    gens.push_back("sd");
  }
  const std::vector<MethodScores> methods = {{"ours", xs}};
  const auto table = evaluate_generators(methods, gens, kDefaultSeeds);
  ASSERT_EQ(table.rows.size(), 1u);
  EXPECT_DOUBLE_EQ(table.rows[0].auc[0].mean, 1.0);
  EXPECT_DOUBLE_EQ(table.rows[0].ap[0].mean, 1.0);
  EXPECT_EQ(metric_table_csv(table),
            "generator,auc_ours,ap_ours\n"
            "sd,1.000000,1.000000\n"
            "average,1.000000,1.000000\n"
            "std,0.000000,0.000000\n");
}

TEST(MetricTable, MethodsMustAlign) {
  std::vector<ScoredSample> xs = {{"a", 0, Label::kReal}, {"b", 1, Label::kFake}};
  auto ys = xs;
  ys[0].sample_id = "z";
  const std::vector<MethodScores> methods = {{"m1", xs}, {"m2", ys}};
  const std::vector<std::string> gens = {"", "g"};
  EXPECT_TRUE(throws_code([&] { evaluate_generators(methods, gens, kDefaultSeeds); }, ErrorCode::kInvalidArgument));
}

TEST(Uniformity, GridPassesAndFloorFails) {
  std::vector<double> grid(10000);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = (static_cast<double>(i) + 0.5) / 10000.0;
  const auto good = uniformity_report(grid);
  EXPECT_GT(good.ks_pvalue, 0.9);
  for (auto c : good.histogram) EXPECT_EQ(c, 500u);

  const std::vector<double> floor(1000, 1e-4);
  const auto bad = uniformity_report(floor);
  EXPECT_LT(bad.ks_pvalue, 1e-12);
  EXPECT_EQ(bad.histogram[0], 1000u);
}

}  // namespace
}  // namespace nullstat
