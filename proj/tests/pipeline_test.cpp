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

#include "nullstat/artifact.hpp"
#include "nullstat/ks.hpp"
#include "nullstat/pipeline.hpp"
#include "nullstat/synthetic.hpp"
#include "test_util.hpp"

namespace nullstat {
namespace {

using testing::throws_code;

SyntheticData independent(std::size_t t, std::size_t n, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n_samples = n;
  spec.groups = {{t, 0, 0.0}};
  spec.seed = seed;
  return generate(spec);
}

TEST(Pipeline, SixteenIndependentColumnsSelectLargeClique) {
  const auto data = independent(16, 200000, 1);
  const auto art = calibrate(data.real, {});
  EXPECT_GE(art.selected.members.size(), 4u);
  EXPECT_FALSE(art.degraded());
  EXPECT_EQ(art.ecdfs.size(), 16u);
  EXPECT_EQ(art.aggregator.k, art.selected.members.size());
  for (const auto& id : art.selected.member_ids) EXPECT_NE(art.find_ecdf(id), nullptr);
}

TEST(Pipeline, FakeRowInReferenceIsRejected) {
  auto data = independent(3, 100, 2);
  auto labels = data.real.labels();
  labels[7] = Label::kFake;
  const StatisticsMatrix ref(data.real.sample_ids(), labels, data.real.columns(), data.real.values());
  EXPECT_TRUE(throws_code([&] { calibrate(ref, {}); }, ErrorCode::kPreconditionViolated));
}

TEST(Pipeline, DeterministicArtifacts) {
  const auto data = independent(6, 5000, 3);
  CalibrationConfig cfg;
  cfg.timestamp = "2026-01-01T00:00:00Z";
  const auto a = encode_artifact(calibrate(data.real, cfg));
  cfg.workers = 3;
  const auto b = encode_artifact(calibrate(data.real, cfg));
  EXPECT_EQ(a, b);
}

TEST(Pipeline, ReferenceSizeChecks) {
  const auto tiny = independent(3, 10, 4);
  EXPECT_TRUE(throws_code([&] { calibrate(tiny.real, {}); }, ErrorCode::kTooFewSamples));
  const StatisticsMatrix empty({}, {}, {StatisticId::make("a", "")}, {});
  EXPECT_TRUE(throws_code([&] { calibrate(empty, {}); }, ErrorCode::kEmptyReference));
  const auto small = independent(3, 100, 4);
  EXPECT_FALSE(calibrate(small.real, {}).warnings.empty());
}

TEST(Pipeline, SingleStatistic) {
  const auto data = independent(1, 3000, 5);
  const auto art = calibrate(data.real, {});
  EXPECT_EQ(art.selected.members, (Clique{0}));
  EXPECT_EQ(infer(art, data.fake).size(), 3000u);
}

TEST(Pipeline, NullRowsGiveUniformUnifiedPvalues) {
  SyntheticSpec spec;
  spec.n_samples = 50000;
  spec.n_fake_samples = 10000;
  spec.groups = {{8, 0, 0.0}};
  spec.seed = 6;
  const auto data = generate(spec);
  for (auto method : {Aggregator::kMinP, Aggregator::kStouffer}) {
    CalibrationConfig cfg;
    cfg.hyper.aggregator = method;
    const auto art = calibrate(data.real, cfg);
    const auto p = unified_pvalues(art, data.fake);
    EXPECT_GT(ks_test_uniform(p).pvalue, 0.01) << to_string(method);
  }
}

TEST(Pipeline, OutlierIsFlagged) {
  const auto data = independent(4, 20000, 7);
  const auto art = calibrate(data.real, {});
  ASSERT_FALSE(art.selected.members.empty());
  const std::size_t target = art.selected.members.front();
  const auto col = data.real.column(target);
  double mean = 0.0, var = 0.0;
  for (double x : col) mean += x;
  mean /= static_cast<double>(col.size());
  for (double x : col) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / static_cast<double>(col.size()));

  std::vector<double> row(data.real.row(0).begin(), data.real.row(0).end());
  for (std::size_t c = 0; c < row.size(); ++c) row[c] = 0.5;
  row[target] = mean + 10.0 * sd;
  const StatisticsMatrix test({"outlier"}, {}, data.real.columns(), row);
  const auto res = infer(art, test, 0.05);
  ASSERT_EQ(res.size(), 1u);
  EXPECT_EQ(res[0].decision, Decision::kFake);

  // The outlying member sits at the clamp floor; min-p corrects it by K.
  const double eps = 1.0 / (20000.0 + 1.0);
  const auto k = static_cast<double>(art.selected.members.size());
  const double floor_driven = 1.0 - std::pow(1.0 - eps, k);
  EXPECT_NEAR(res[0].per_statistic_pvalues[0], eps, 1e-15);
  EXPECT_LE(res[0].unified_pvalue, floor_driven * (1.0 + 1e-9));
}

TEST(Pipeline, DecisionUsesStrictInequality) {
  const auto data = independent(4, 5000, 8);
  const auto art = calibrate(data.real, {});
  const auto first = infer(art, data.fake, 0.05);
  std::size_t pick = first.size();
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i].unified_pvalue > 0.01 && first[i].unified_pvalue < 0.99) {
      pick = i;
      break;
    }
  }
  ASSERT_LT(pick, first.size());
  const double alpha = first[pick].unified_pvalue;
  const auto again = infer(art, data.fake, alpha);
  EXPECT_EQ(again[pick].decision, Decision::kReal);
  EXPECT_EQ(again[pick].alpha, alpha);
  const auto above = infer(art, data.fake, std::nextafter(alpha, 1.0));
  EXPECT_EQ(above[pick].decision, Decision::kFake);
}

TEST(Pipeline, InferenceReadsOnlyCliqueColumns) {
  SyntheticSpec spec;
  spec.n_samples = 20000;
  spec.groups = {{1, 1, 0.01}, {3, 0, 0.0}};
  spec.seed = 9;
  const auto data = generate(spec);
  const auto art = calibrate(data.real, {});
  ASSERT_LT(art.selected.members.size(), data.real.cols());

  // Keep only the selected columns, in reverse order.
  std::vector<std::size_t> keep(art.selected.members.rbegin(), art.selected.members.rend());
  std::vector<StatisticId> cols;
  std::vector<double> values;
  for (std::size_t r = 0; r < data.fake.rows(); ++r) {
    for (std::size_t c : keep) values.push_back(data.fake.at(r, c));
  }
  for (std::size_t c : keep) cols.push_back(data.fake.columns()[c]);
  const StatisticsMatrix narrow(data.fake.sample_ids(), data.fake.labels(), cols, values);
  const auto a = infer(art, data.fake);
  const auto b = infer(art, narrow);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].unified_pvalue, b[i].unified_pvalue);
    EXPECT_EQ(a[i].per_statistic_pvalues.size(), art.selected.members.size());
  }

  const StatisticsMatrix missing(data.fake.sample_ids(), data.fake.labels(),
                                 std::vector<StatisticId>(cols.begin() + 1, cols.end()),
                                 [&] {
                                   std::vector<double> v;
                                   for (std::size_t r = 0; r < data.fake.rows(); ++r) {
                                     for (std::size_t k = 1; k < keep.size(); ++k) v.push_back(data.fake.at(r, keep[k]));
                                   }
                                   return v;
                                 }());
  EXPECT_TRUE(throws_code([&] { infer(art, missing); }, ErrorCode::kMissingColumn));
  EXPECT_TRUE(throws_code([&] { infer(art, data.fake, 0.0); }, ErrorCode::kInvalidArgument));
}

TEST(Pipeline, WorkersDoNotChangeInference) {
  const auto data = independent(5, 4000, 10);
  const auto art = calibrate(data.real, {});
  const auto a = infer(art, data.fake, 0.05, 1);
  const auto b = infer(art, data.fake, 0.05, 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].sample_id, b[i].sample_id);
    EXPECT_EQ(a[i].unified_pvalue, b[i].unified_pvalue);
  }
}

}  // namespace
}  // namespace nullstat
