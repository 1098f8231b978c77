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

#include "nullstat/pipeline.hpp"
#include "nullstat/selection.hpp"
#include "nullstat/synthetic.hpp"
#include "test_util.hpp"

namespace nullstat {
namespace {

using testing::throws_code;
using testing::uniform_draws;
using Edges = std::vector<std::pair<std::size_t, std::size_t>>;

IndependenceGraph named_graph(const std::vector<std::string>& names, const Edges& edges) {
  const std::size_t n = names.size();
  std::vector<StatisticId> ids;
  for (const auto& name : names) ids.push_back(StatisticId::parse(name));
  std::vector<std::uint8_t> adj(n * n, 0);
  for (auto [a, b] : edges) adj[a * n + b] = adj[b * n + a] = 1;
  return IndependenceGraph(ids, adj);
}

PValueMatrix null_pvalues(const IndependenceGraph& g, std::size_t rows, std::uint64_t seed) {
  PValueMatrix pv;
  pv.columns = g.nodes();
  for (std::size_t c = 0; c < g.size(); ++c) pv.data.push_back(uniform_draws(rows, seed + c));
  return pv;
}

TEST(Selection, PreferredCoverageBeatsSize) {
  // {0,1} are preferred encoders; {2,3,4} is larger but has none.
  const auto g = named_graph({"dino.l1", "clip.l1", "x.a", "x.b", "x.c"}, {{0, 1}, {2, 3}, {3, 4}, {2, 4}});
  SelectionOptions opts;
  opts.preferred = {"dino", "clip.l1"};
  const auto s = select_clique(g, null_pvalues(g, 2000, 1), opts);
  ASSERT_FALSE(s.degraded);
  EXPECT_EQ(s.members, (Clique{0, 1}));
  EXPECT_EQ(s.preferred_hits, 2u);
  EXPECT_EQ(s.member_ids[0].key(), "dino.l1");
  EXPECT_EQ(s.n_candidates, 2u);
}

TEST(Selection, SizeBreaksTies) {
  const auto g = named_graph({"a.1", "a.2", "a.3", "b.1", "b.2", "b.3", "b.4"},
                             {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {3, 5}, {3, 6}, {4, 5}, {4, 6}, {5, 6}});
  const auto s = select_clique(g, null_pvalues(g, 2000, 2), {});
  ASSERT_FALSE(s.degraded);
  EXPECT_EQ(s.members, (Clique{3, 4, 5, 6}));
}

TEST(Selection, LexicographicTieBreak) {
  const auto g = named_graph({"a.1", "a.2", "a.3", "a.4"}, {{0, 1}, {2, 3}});
  std::vector<CliqueCandidate> cands = {{{2, 3}, {0.01, 0.9, 100}, 0, true},
                                        {{0, 1}, {0.01, 0.6, 100}, 0, true}};
  EXPECT_EQ(choose_clique(g, cands).members, (Clique{0, 1}));
}

TEST(Selection, DegradedReturnsBestKs) {
  const auto g = named_graph({"a.1", "a.2", "a.3"}, {{0, 1}});
  PValueMatrix pv;
  pv.columns = g.nodes();
  for (std::size_t c = 0; c < 3; ++c) {
    auto col = uniform_draws(2000, 30 + c);
    // Column 2 is mildly skewed, columns 0 and 1 strongly so.
    const double power = c == 2 ? 1.3 : 3.0;
    for (auto& x : col) x = std::pow(x, power);
    pv.data.push_back(col);
  }
  const auto s = select_clique(g, pv, {});
  EXPECT_TRUE(s.degraded);
  EXPECT_EQ(s.n_passing, 0u);
  EXPECT_EQ(s.members, (Clique{2}));
  EXPECT_LT(s.ks_pvalue, 0.05);
}

TEST(Selection, AggregatorChangesKsInput) {
  const auto g = named_graph({"a.1", "a.2"}, {{0, 1}});
  const auto pv = null_pvalues(g, 500, 5);
  const std::vector<std::size_t> rows = {0, 1, 2};
  const auto mp = aggregate_rows(pv, {0, 1}, Aggregator::kMinP, rows);
  const auto st = aggregate_rows(pv, {0, 1}, Aggregator::kStouffer, rows);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::vector<double> p = {pv.data[0][i], pv.data[1][i]};
    EXPECT_EQ(mp[i], min_p(p));
    EXPECT_EQ(st[i], stouffer(p));
  }
}

TEST(Selection, PreferredMatching) {
  const std::vector<std::string> pref = {"dino", "clip.l05"};
  EXPECT_TRUE(matches_preferred(StatisticId::parse("dino.l10"), pref));
  EXPECT_TRUE(matches_preferred(StatisticId::parse("clip.l05"), pref));
  EXPECT_FALSE(matches_preferred(StatisticId::parse("clip.l10"), pref));
  EXPECT_FALSE(matches_preferred(StatisticId::parse("dinov2.l10"), pref));
}

TEST(Selection, Errors) {
  const auto g = named_graph({"a.1", "a.2"}, {});
  EXPECT_TRUE(throws_code([&] { choose_clique(g, std::vector<CliqueCandidate>{}); }, ErrorCode::kEmptyInput));
  PValueMatrix wrong;
  wrong.columns = {StatisticId::make("a", "1")};
  wrong.data = {{0.5}};
  EXPECT_TRUE(throws_code([&] { select_clique(g, wrong, {}); }, ErrorCode::kLengthMismatch));
}

TEST(Selection, NoisyCopyIsSuppressed) {
  SyntheticSpec spec;
  spec.n_samples = 50000;
  spec.groups = {{1, 1, 0.01}, {4, 0, 0.0}};
  spec.seed = 3;
  const auto data = generate(spec);
  const auto report = calibrate_with_report(data.real, {});
  const auto base = *data.real.find_column(StatisticId::parse("g0.s0"));
  const auto copy = *data.real.find_column(StatisticId::parse("g0.s0c1"));
  EXPECT_GT(report.dependence(base, copy), 0.5);
  EXPECT_FALSE(report.graph.adjacent(base, copy));
  const auto& members = report.artifact.selected.members;
  const bool has_base = std::count(members.begin(), members.end(), base) > 0;
  const bool has_copy = std::count(members.begin(), members.end(), copy) > 0;
  EXPECT_FALSE(has_base && has_copy);
  EXPECT_EQ(members.size(), 5u);
  EXPECT_FALSE(report.artifact.degraded());
}

}  // namespace
}  // namespace nullstat
