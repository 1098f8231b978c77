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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nullstat/detail/parallel.hpp"
#include "nullstat/ecdf.hpp"
#include "nullstat/error.hpp"
#include "nullstat/stat_matrix.hpp"

namespace nullstat {

struct ContingencyResult {
  double chi2 = 0.0;
  double cramers_v = 0.0;
  std::uint64_t n = 0;
};

using ContingencyTable = std::vector<std::vector<std::uint64_t>>;

/// Pearson chi-square against the product of the marginals, and
/// V = sqrt((chi2 / N) / (min(r, c) - 1)). Empty rows and columns are
/// dropped first; a table with fewer than two occupied rows or columns has no
/// measurable association and raises DegenerateColumn.
inline ContingencyResult chi2_from_table(const ContingencyTable& table) {
  if (table.empty()) throw Error(ErrorCode::kDegenerateColumn, "empty contingency table");
  const std::size_t n_cols = table.front().size();
  std::vector<std::uint64_t> row_sum(table.size(), 0), col_sum(n_cols, 0);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i].size() != n_cols) throw Error(ErrorCode::kLengthMismatch, "ragged contingency table");
    for (std::size_t j = 0; j < n_cols; ++j) {
      row_sum[i] += table[i][j];
      col_sum[j] += table[i][j];
    }
    total += row_sum[i];
  }
  const auto occupied = [](const std::vector<std::uint64_t>& s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](auto v) { return v > 0; }));
  };
  const std::size_t r = occupied(row_sum), c = occupied(col_sum);
  if (r < 2 || c < 2) {
    throw Error(ErrorCode::kDegenerateColumn, "a variable occupies a single bin");
  }
  // chi2 = N * (sum_ij O_ij^2 / (R_i C_j) - 1)
  double ratio_sum = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (row_sum[i] == 0) continue;
    for (std::size_t j = 0; j < n_cols; ++j) {
      if (table[i][j] == 0) continue;
      const auto o = static_cast<double>(table[i][j]);
      ratio_sum += o * o / (static_cast<double>(row_sum[i]) * static_cast<double>(col_sum[j]));
    }
  }
  ContingencyResult out;
  out.n = total;
  out.chi2 = std::max(0.0, static_cast<double>(total) * (ratio_sum - 1.0));
  const double phi2 = out.chi2 / static_cast<double>(total);
  out.cramers_v = std::clamp(std::sqrt(phi2 / static_cast<double>(std::min(r, c) - 1)), 0.0, 1.0);
  return out;
}

/// Right-closed equal-width cells over [0, 1]: cell k holds (k/B, (k+1)/B],
/// and cell 0 also holds 0.
inline std::vector<std::uint16_t> bin_unit_interval(std::span<const double> values,
                                                    std::size_t n_bins) {
  if (n_bins < 2 || n_bins > 4096) throw Error(ErrorCode::kInvalidArgument, "n_bins must be in [2, 4096]");
  std::vector<std::uint16_t> out(values.size());
  const auto b = static_cast<double>(n_bins);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double cell = std::ceil(std::clamp(values[i], 0.0, 1.0) * b) - 1.0;
    out[i] = static_cast<std::uint16_t>(std::clamp(cell, 0.0, b - 1.0));
  }
  return out;
}

inline ContingencyResult chi2_binned(std::span<const std::uint16_t> a,
                                     std::span<const std::uint16_t> b, std::size_t n_bins) {
  if (a.size() != b.size()) throw Error(ErrorCode::kLengthMismatch, "columns differ in length");
  std::vector<std::uint64_t> flat(n_bins * n_bins, 0);
  for (std::size_t i = 0; i < a.size(); ++i) ++flat[a[i] * n_bins + b[i]];
  ContingencyTable table(n_bins, std::vector<std::uint64_t>(n_bins));
  for (std::size_t i = 0; i < n_bins; ++i) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(i * n_bins), n_bins, table[i].begin());
  }
  return chi2_from_table(table);
}

/// Chi-square test of independence between two p-value columns binned into
/// an n_bins x n_bins table.
inline ContingencyResult chi2_contingency(std::span<const double> a, std::span<const double> b,
                                          std::size_t n_bins = 15) {
  if (a.size() != b.size()) throw Error(ErrorCode::kLengthMismatch, "columns differ in length");
  const auto ba = bin_unit_interval(a, n_bins);
  const auto bb = bin_unit_interval(b, n_bins);
  return chi2_binned(ba, bb, n_bins);
}

/// Symmetric T x T matrix of pairwise Cramer's V with a zero diagonal.
class DependenceMatrix {
 public:
  DependenceMatrix() = default;
  DependenceMatrix(std::vector<StatisticId> columns, std::vector<double> values)
      : columns_(std::move(columns)), values_(std::move(values)) {
    if (values_.size() != columns_.size() * columns_.size()) {
      throw Error(ErrorCode::kLengthMismatch, "dependence matrix must be T x T");
    }
    const std::size_t t = columns_.size();
    for (std::size_t i = 0; i < t; ++i) {
      if (values_[i * t + i] != 0.0) throw Error(ErrorCode::kInvalidArgument, "nonzero diagonal");
      for (std::size_t j = 0; j < t; ++j) {
        const double v = values_[i * t + j];
        if (!(v >= 0.0 && v <= 1.0) || v != values_[j * t + i]) {
          throw Error(ErrorCode::kInvalidArgument, "dependence values must be symmetric in [0, 1]");
        }
      }
    }
  }

  std::size_t size() const { return columns_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * size() + j]; }
  const std::vector<StatisticId>& columns() const { return columns_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<StatisticId> columns_;
  std::vector<double> values_;
};

/// Cramer's V over all T(T-1)/2 column pairs. A pair involving a degenerate
/// column is recorded as V = 1 so it can never become an edge.
inline DependenceMatrix build_dependence_matrix(const PValueMatrix& pvals,
                                                std::size_t n_bins = 15,
                                                std::size_t workers = 1) {
  const std::size_t t = pvals.cols();
  if (t < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two statistics");
  std::vector<std::vector<std::uint16_t>> binned(t);
  detail::parallel_for(t, workers, [&](std::size_t c) {
    binned[c] = bin_unit_interval(pvals.column(c), n_bins);
  });

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(t * (t - 1) / 2);
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = i + 1; j < t; ++j) pairs.emplace_back(i, j);
  }
  std::vector<double> v(t * t, 0.0);
  detail::parallel_for(pairs.size(), workers, [&](std::size_t p) {
    const auto [i, j] = pairs[p];
    double value = 1.0;
    try {
      value = chi2_binned(binned[i], binned[j], n_bins).cramers_v;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateColumn) throw;
    }
    v[i * t + j] = value;
    v[j * t + i] = value;
  });
  return DependenceMatrix(pvals.columns, std::move(v));
}

/// Undirected graph over statistics; an edge means "weak enough association
/// to treat as independent".
class IndependenceGraph {
 public:
  IndependenceGraph() = default;
  IndependenceGraph(std::vector<StatisticId> nodes, std::vector<std::uint8_t> adjacency)
      : nodes_(std::move(nodes)), adjacency_(std::move(adjacency)) {
    const std::size_t t = nodes_.size();
    if (adjacency_.size() != t * t) throw Error(ErrorCode::kLengthMismatch, "adjacency must be T x T");
    for (std::size_t i = 0; i < t; ++i) {
      if (adjacency_[i * t + i]) throw Error(ErrorCode::kInvalidArgument, "self-loop in graph");
      for (std::size_t j = 0; j < i; ++j) {
        if (adjacency_[i * t + j] != adjacency_[j * t + i]) {
          throw Error(ErrorCode::kInvalidArgument, "adjacency must be symmetric");
        }
      }
    }
  }

  /// Unlabeled graph on n nodes from an edge list; for tests and benchmarks.
  static IndependenceGraph from_edges(std::size_t n,
                                      std::span<const std::pair<std::size_t, std::size_t>> edges) {
    std::vector<StatisticId> nodes;
    for (std::size_t i = 0; i < n; ++i) nodes.push_back(StatisticId::make("s" + std::to_string(i), ""));
    std::vector<std::uint8_t> adj(n * n, 0);
    for (auto [a, b] : edges) {
      if (a == b) continue;
      adj[a * n + b] = adj[b * n + a] = 1;
    }
    return IndependenceGraph(std::move(nodes), std::move(adj));
  }

  std::size_t size() const { return nodes_.size(); }
  bool adjacent(std::size_t i, std::size_t j) const { return adjacency_[i * size() + j] != 0; }
  const std::vector<StatisticId>& nodes() const { return nodes_; }

  std::size_t edge_count() const {
    return static_cast<std::size_t>(std::count(adjacency_.begin(), adjacency_.end(), 1)) / 2;
  }

 private:
  std::vector<StatisticId> nodes_;
  std::vector<std::uint8_t> adjacency_;
};

/// Edge (i, j) iff V(i, j) <= v_threshold.
inline IndependenceGraph build_graph(const DependenceMatrix& dep, double v_threshold = 0.07) {
  if (!(v_threshold > 0.0 && v_threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "v_threshold must be in (0, 1)");
  }
  const std::size_t t = dep.size();
  std::vector<std::uint8_t> adj(t * t, 0);
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < t; ++j) {
      if (i != j && dep(i, j) <= v_threshold) adj[i * t + j] = 1;
    }
  }
  return IndependenceGraph(dep.columns(), std::move(adj));
}

}  // namespace nullstat
