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

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nullstat/aggregation.hpp"
#include "nullstat/cliques.hpp"
#include "nullstat/ecdf.hpp"
#include "nullstat/independence.hpp"
#include "nullstat/ks.hpp"

namespace nullstat {

struct SelectionOptions {
  Aggregator aggregator = Aggregator::kMinP;
  /// Entries match a statistic either by full `name.tag` key or by extractor
  /// name alone, so "dino" covers every dino configuration.
  std::vector<std::string> preferred;
  double alpha_ks = 0.05;
  std::size_t ks_subsample = 2000;
  std::uint64_t seed = 0;
};

struct CliqueCandidate {
  Clique members;
  KsResult ks;
  std::size_t preferred_hits = 0;
  bool passes = false;
};

struct CliqueSelection {
  Clique members;
  std::vector<StatisticId> member_ids;
  double ks_pvalue = 0.0;
  double ks_statistic = 0.0;
  std::size_t preferred_hits = 0;
  /// No maximal clique passed the KS filter; members is the best-KS clique.
  bool degraded = false;
  std::size_t n_candidates = 0;
  std::size_t n_passing = 0;

  friend bool operator==(const CliqueSelection&, const CliqueSelection&) = default;
};

inline bool matches_preferred(const StatisticId& id, std::span<const std::string> preferred) {
  const std::string key = id.key();
  return std::any_of(preferred.begin(), preferred.end(), [&](const std::string& p) {
    return p == key || p == id.extractor_name;
  });
}

/// Aggregates each row of `pvals` restricted to `members`, for the given rows.
inline std::vector<double> aggregate_rows(const PValueMatrix& pvals, const Clique& members,
                                          Aggregator method, std::span<const std::size_t> rows) {
  std::vector<double> out(rows.size());
  std::vector<double> buf(members.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < members.size(); ++k) buf[k] = pvals.data[members[k]][rows[i]];
    out[i] = aggregate(method, buf);
  }
  return out;
}

/// Runs the KS uniformity filter on every maximal clique of g. Each clique's
/// aggregated calibration p-values are tested on the same seeded subsample
/// of rows, which is what ks_uniformity would draw from the full column.
inline std::vector<CliqueCandidate> evaluate_cliques(const IndependenceGraph& g,
                                                     const PValueMatrix& pvals,
                                                     const SelectionOptions& options) {
  if (pvals.cols() != g.size()) {
    throw Error(ErrorCode::kLengthMismatch, "p-value columns do not match graph nodes");
  }
  if (pvals.rows() == 0) throw Error(ErrorCode::kEmptyInput, "no calibration rows");
  const auto rows = ks_subsample_indices(pvals.rows(), options.ks_subsample, options.seed);
  std::vector<CliqueCandidate> out;
  for (auto& members : enumerate_maximal_cliques(g)) {
    CliqueCandidate c;
    const auto aggregated = aggregate_rows(pvals, members, options.aggregator, rows);
    c.ks = ks_test_uniform(aggregated);
    for (std::size_t m : members) {
      if (matches_preferred(g.nodes()[m], options.preferred)) ++c.preferred_hits;
    }
    c.passes = c.ks.pvalue >= options.alpha_ks;
    c.members = std::move(members);
    out.push_back(std::move(c));
  }
  return out;
}

/// Among KS-passing cliques: most preferred statistics, then largest, then
/// lexicographically smallest. Falls back to the best-KS clique (degraded).
inline CliqueSelection choose_clique(const IndependenceGraph& g,
                                     std::span<const CliqueCandidate> candidates) {
  if (candidates.empty()) throw Error(ErrorCode::kEmptyInput, "no clique candidates");
  const CliqueCandidate* best = nullptr;
  std::size_t n_passing = 0;
  for (const auto& c : candidates) {
    if (!c.passes) continue;
    ++n_passing;
    if (!best || c.preferred_hits > best->preferred_hits ||
        (c.preferred_hits == best->preferred_hits &&
         (c.members.size() > best->members.size() ||
          (c.members.size() == best->members.size() && c.members < best->members)))) {
      best = &c;
    }
  }
  const bool degraded = best == nullptr;
  if (degraded) {
    for (const auto& c : candidates) {
      if (!best || c.ks.pvalue > best->ks.pvalue ||
          (c.ks.pvalue == best->ks.pvalue && c.members < best->members)) {
        best = &c;
      }
    }
  }
  CliqueSelection s;
  s.members = best->members;
  for (std::size_t m : s.members) s.member_ids.push_back(g.nodes()[m]);
  s.ks_pvalue = best->ks.pvalue;
  s.ks_statistic = best->ks.statistic;
  s.preferred_hits = best->preferred_hits;
  s.degraded = degraded;
  s.n_candidates = candidates.size();
  s.n_passing = n_passing;
  return s;
}

inline CliqueSelection select_clique(const IndependenceGraph& g, const PValueMatrix& pvals,
                                     const SelectionOptions& options) {
  const auto candidates = evaluate_cliques(g, pvals, options);
  return choose_clique(g, candidates);
}

}  // namespace nullstat
