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

#include "nullstat/synthetic.hpp"
#include "test_util.hpp"

namespace nullstat {
namespace {

using testing::throws_code;

TEST(Synthetic, Deterministic) {
  const auto spec = preset("single-shift", 500, 4);
  const auto a = generate(spec), b = generate(spec);
  EXPECT_EQ(a.real, b.real);
  EXPECT_EQ(a.fake, b.fake);
  auto other = spec;
  other.seed = 5;
  EXPECT_NE(generate(other).real, a.real);
}

TEST(Synthetic, LayoutAndNames) {
  SyntheticSpec spec;
  spec.n_samples = 10;
  spec.n_fake_samples = 4;
  spec.groups = {{2, 1, 0.1}, {1, 0, 0.0}};
  const auto d = generate(spec);
  ASSERT_EQ(d.real.cols(), 5u);
  EXPECT_EQ(d.real.columns()[0].key(), "g0.s0");
  EXPECT_EQ(d.real.columns()[1].key(), "g0.s0c1");
  EXPECT_EQ(d.real.columns()[2].key(), "g0.s1");
  EXPECT_EQ(d.real.columns()[4].key(), "g1.s0");
  EXPECT_EQ(d.fake.rows(), 4u);
  for (auto l : d.real.labels()) EXPECT_EQ(l, Label::kReal);
  for (auto l : d.fake.labels()) EXPECT_EQ(l, Label::kFake);
  for (double v : d.real.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Synthetic, FakeShiftAppliesToListedColumns) {
  SyntheticSpec spec;
  spec.n_samples = 20000;
  spec.groups = {{2, 0, 0.0}};
  spec.fake_shift = {{1}, 2.0, 1.0};
  const auto d = generate(spec);
  const auto c0 = d.fake.column(0), c1 = d.fake.column(1);
  EXPECT_LE(*std::max_element(c0.begin(), c0.end()), 1.0);
  EXPECT_GE(*std::min_element(c1.begin(), c1.end()), 2.0);
}

TEST(Synthetic, InvalidSpecs) {
  SyntheticSpec none;
  none.groups = {};
  EXPECT_TRUE(throws_code([&] { generate(none); }, ErrorCode::kInvalidSpec));
  SyntheticSpec negative;
  negative.groups = {{1, 1, -0.1}};
  EXPECT_TRUE(throws_code([&] { generate(negative); }, ErrorCode::kInvalidSpec));
  SyntheticSpec out_of_range;
  out_of_range.fake_shift = {{3}, 0.1, 1.0};
  EXPECT_TRUE(throws_code([&] { generate(out_of_range); }, ErrorCode::kInvalidSpec));
  EXPECT_TRUE(throws_code([] { preset("nope", 10, 0); }, ErrorCode::kInvalidSpec));
}

TEST(Synthetic, NoisyCopyIsStronglyDependent) {
  const auto d = generate(preset("dependent-copy", 200000, 0));
  const auto base = d.real.column(0), copy = d.real.column(1), other = d.real.column(2);
  EXPECT_GT(chi2_contingency(base, copy).cramers_v, 0.5);
  EXPECT_LT(chi2_contingency(base, other).cramers_v, 0.07);
}

TEST(Synthetic, NullFakesAreIndistinguishable) {
  SyntheticSpec spec = preset("lemma-check", 20000, 0);
  spec.n_fake_samples = 10000;
  const auto d = generate(spec);
  const auto art = calibrate(d.real, {});
  auto held_out = generate([&] {
    auto s = spec;
    s.seed = 99;
    return s;
  }());
  EXPECT_NEAR(detection_auc(art, held_out.real, d.fake), 0.5, 0.03);
}

double method_auc(const SyntheticData& d, Aggregator method) {
  CalibrationConfig cfg;
  cfg.hyper.aggregator = method;
  const auto art = calibrate(d.real, cfg);
  auto test_real = generate([&] {
    auto s = preset("lemma-check", d.fake.rows(), 1234);
    return s;
  }());
  return detection_auc(art, test_real.real, d.fake);
}

TEST(Synthetic, MinPWinsWhenOneColumnCarriesSignal) {
  const auto d = generate(preset("single-shift", 20000, 1));
  const double mp = method_auc(d, Aggregator::kMinP), st = method_auc(d, Aggregator::kStouffer);
  EXPECT_GE(mp, st - 0.02) << "min-p " << mp << " stouffer " << st;
}

TEST(Synthetic, StoufferWinsWhenSignalIsSpread) {
  const auto d = generate(preset("broad-shift", 20000, 1));
  const double mp = method_auc(d, Aggregator::kMinP), st = method_auc(d, Aggregator::kStouffer);
  EXPECT_GE(st, mp - 0.02) << "min-p " << mp << " stouffer " << st;
}

TEST(Synthetic, GaussianMixtureBase) {
  SyntheticSpec spec;
  spec.n_samples = 20000;
  spec.base = BaseDistribution::kGaussianMixture;
  spec.groups = {{3, 0, 0.0}};
  const auto d = generate(spec);
  const auto c = d.real.column(0);
  EXPECT_LT(*std::min_element(c.begin(), c.end()), -1.0);
  EXPECT_GT(*std::max_element(c.begin(), c.end()), 1.0);
  const auto art = calibrate(d.real, {});
  EXPECT_GT(ks_test_uniform(unified_pvalues(art, d.fake)).pvalue, 0.01);
}

TEST(Synthetic, ScalingBenchShape) {
  const auto rows = bench_clique_scaling({4, 8}, 5000, 0, 1);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].n_stats, 4u);
  EXPECT_GE(rows[1].cramers_v_ms, 0.0);
  const auto csv = scaling_csv(rows);
  EXPECT_EQ(csv.rfind("T,cramers_v_ms,graph_clique_ms\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(Synthetic, DomainShiftMiniature) {
  const auto r = domain_shift_miniature(0);
  EXPECT_LT(r.ks_real_shifted, 0.01);
  EXPECT_GT(r.auc_shifted, 0.7);
  EXPECT_GT(r.ks_real_control, 0.01);
  EXPECT_GT(r.auc_calibrated, 0.7);
}

}  // namespace
}  // namespace nullstat
