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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nullstat/detail/parallel.hpp"
#include "nullstat/error.hpp"
#include "nullstat/stat_matrix.hpp"

namespace nullstat {

struct EcdfOptions {
  std::size_t n_bins = 400;
  /// Lower clamp for p-values; defaults to 1 / (n_samples + 1).
  std::optional<double> clamp_epsilon;
  /// Widen a zero-width span symmetrically instead of rejecting it.
  bool widen_degenerate = true;
};

namespace detail {

// Index b of the right-closed bin (edges[b], edges[b+1]] containing t; the
// first bin also owns edges[0]. Requires edges[0] <= t <= edges.back().
inline std::size_t locate_bin(std::span<const double> edges, double t) {
  const std::size_t n_bins = edges.size() - 1;
  const double lo = edges.front();
  const double width = (edges.back() - lo) / static_cast<double>(n_bins);
  double guess = std::ceil((t - lo) / width) - 1.0;
  std::size_t b = guess <= 0.0 ? 0
                  : guess >= static_cast<double>(n_bins - 1)
                      ? n_bins - 1
                      : static_cast<std::size_t>(guess);
  while (b + 1 < n_bins && t > edges[b + 1]) ++b;
  while (b > 0 && t <= edges[b]) --b;
  return b;
}

}  // namespace detail

/// Binned empirical CDF of one statistic over a reference sample.
///
/// Equal-width bins span the observed range. cumulative_fraction[b] is the
/// fraction of reference values <= the right edge of bin b, so at every right
/// bin edge the model agrees exactly with the sample ECDF (ties count as
/// "<="). Below that, the value rises linearly from 0 at the first edge.
class EcdfModel {
 public:
  EcdfModel() = default;

  EcdfModel(StatisticId statistic, std::vector<double> bin_edges,
            std::vector<double> cumulative_fraction, std::uint64_t n_samples,
            double clamp_epsilon)
      : statistic_(std::move(statistic)),
        bin_edges_(std::move(bin_edges)),
        cumulative_(std::move(cumulative_fraction)),
        n_samples_(n_samples),
        clamp_epsilon_(clamp_epsilon) {
    validate();
  }

  const StatisticId& statistic() const { return statistic_; }
  const std::vector<double>& bin_edges() const { return bin_edges_; }
  const std::vector<double>& cumulative_fraction() const { return cumulative_; }
  std::uint64_t n_samples() const { return n_samples_; }
  double clamp_epsilon() const { return clamp_epsilon_; }
  std::size_t n_bins() const { return cumulative_.size(); }

  double evaluate(double t) const {
    if (!std::isfinite(t)) throw Error(ErrorCode::kNonFiniteInput, "ECDF evaluated at non-finite value");
    if (t < bin_edges_.front()) return 0.0;
    if (t >= bin_edges_.back()) return 1.0;
    const std::size_t b = detail::locate_bin(bin_edges_, t);
    const double left = b == 0 ? 0.0 : cumulative_[b - 1];
    const double frac = (t - bin_edges_[b]) / (bin_edges_[b + 1] - bin_edges_[b]);
    return left + (cumulative_[b] - left) * std::clamp(frac, 0.0, 1.0);
  }

  /// 2 * min(F(t), 1 - F(t)), clamped into [clamp_epsilon, 1].
  double pvalue(double t) const {
    const double f = evaluate(t);
    return std::clamp(2.0 * std::min(f, 1.0 - f), clamp_epsilon_, 1.0);
  }

  friend bool operator==(const EcdfModel&, const EcdfModel&) = default;

 private:
  void validate() const {
    if (cumulative_.size() < 1 || bin_edges_.size() != cumulative_.size() + 1) {
      throw Error(ErrorCode::kInvalidArgument, "ECDF needs n_bins + 1 edges");
    }
    for (std::size_t i = 0; i + 1 < bin_edges_.size(); ++i) {
      if (!(bin_edges_[i] < bin_edges_[i + 1])) {
        throw Error(ErrorCode::kInvalidArgument, "ECDF bin edges must be strictly increasing");
      }
    }
    double prev = 0.0;
    for (double c : cumulative_) {
      if (!(c >= prev && c <= 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "ECDF cumulative fractions must be nondecreasing in [0,1]");
      }
      prev = c;
    }
    if (cumulative_.back() != 1.0) {
      throw Error(ErrorCode::kInvalidArgument, "ECDF cumulative fraction must end at 1");
    }
    if (!(clamp_epsilon_ > 0.0 && clamp_epsilon_ < 0.5)) {
      throw Error(ErrorCode::kInvalidArgument, "clamp_epsilon must be in (0, 0.5)");
    }
  }

  StatisticId statistic_;
  std::vector<double> bin_edges_;
  std::vector<double> cumulative_;
  std::uint64_t n_samples_ = 0;
  double clamp_epsilon_ = 0.5;
};

inline EcdfModel build_ecdf(std::span<const double> values, const EcdfOptions& options = {},
                            StatisticId statistic = {}) {
  if (values.empty()) throw Error(ErrorCode::kEmptyReference, "no reference values");
  if (options.n_bins < 2) throw Error(ErrorCode::kInvalidArgument, "n_bins must be >= 2");
  double lo = values[0], hi = values[0];
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteInput, "non-finite reference value");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const std::size_t n_bins = options.n_bins;
  const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
  if (!(hi - lo > 1e-12 * scale)) {
    if (!options.widen_degenerate) {
      throw Error(ErrorCode::kDegenerateAllEqual, "all reference values are equal");
    }
    const double mid = lo + (hi - lo) / 2.0;
    const double margin = 1e-9 * scale;
    lo = mid - margin;
    hi = mid + margin;
  }

  std::vector<double> edges(n_bins + 1);
  for (std::size_t i = 0; i < n_bins; ++i) {
    edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_bins);
  }
  edges[n_bins] = hi;

  std::vector<std::uint64_t> counts(n_bins, 0);
  for (double v : values) ++counts[detail::locate_bin(edges, v)];
  std::vector<double> cumulative(n_bins);
  std::uint64_t running = 0;
  const auto n = static_cast<double>(values.size());
  for (std::size_t b = 0; b < n_bins; ++b) {
    running += counts[b];
    cumulative[b] = static_cast<double>(running) / n;
  }
  cumulative[n_bins - 1] = 1.0;

  const double eps = options.clamp_epsilon.value_or(1.0 / (n + 1.0));
  if (statistic.display_name.empty()) statistic.display_name = statistic.key();
  return EcdfModel(std::move(statistic), std::move(edges), std::move(cumulative),
                   values.size(), eps);
}

inline double evaluate_ecdf(const EcdfModel& m, double t) { return m.evaluate(t); }

inline double two_sided_pvalue(const EcdfModel& m, double t) { return m.pvalue(t); }

/// Column-major matrix of p-values; column c belongs to columns[c].
struct PValueMatrix {
  std::vector<StatisticId> columns;
  std::vector<std::vector<double>> data;

  std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }
  std::size_t cols() const { return data.size(); }
  std::span<const double> column(std::size_t c) const { return data[c]; }
};

/// Builds one ECDF per column of `ref`.
inline std::vector<EcdfModel> build_ecdfs(const StatisticsMatrix& ref, const EcdfOptions& options,
                                          std::size_t workers = 1) {
  std::vector<EcdfModel> models(ref.cols());
  detail::parallel_for(ref.cols(), workers, [&](std::size_t c) {
    const auto values = ref.column(c);
    models[c] = build_ecdf(values, options, ref.columns()[c]);
  });
  return models;
}

/// Maps every row of `test` through the given models. Each model's statistic
/// must be present in `test`; other test columns are ignored.
inline PValueMatrix map_pvalues(std::span<const EcdfModel> models, const StatisticsMatrix& test,
                                std::size_t workers = 1) {
  PValueMatrix out;
  std::vector<std::size_t> source(models.size());
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto col = test.find_column(models[k].statistic());
    if (!col) {
      throw Error(ErrorCode::kMissingColumn,
                  "statistic '" + models[k].statistic().key() + "' not found in test matrix");
    }
    source[k] = *col;
    out.columns.push_back(models[k].statistic());
  }
  out.data.assign(models.size(), std::vector<double>(test.rows()));
  detail::parallel_for(models.size(), workers, [&](std::size_t k) {
    for (std::size_t r = 0; r < test.rows(); ++r) {
      out.data[k][r] = models[k].pvalue(test.at(r, source[k]));
    }
  });
  return out;
}

/// Calibrates an ECDF per test column on `ref` and maps `test` through it.
inline PValueMatrix pvalue_matrix(const StatisticsMatrix& ref, const StatisticsMatrix& test,
                                  const EcdfOptions& options = {}, std::size_t workers = 1) {
  std::vector<std::size_t> ref_cols;
  for (const auto& id : test.columns()) {
    const auto col = ref.find_column(id);
    if (!col) {
      throw Error(ErrorCode::kMissingColumn,
                  "statistic '" + id.key() + "' absent from reference matrix");
    }
    ref_cols.push_back(*col);
  }
  std::vector<EcdfModel> models(ref_cols.size());
  detail::parallel_for(ref_cols.size(), workers, [&](std::size_t k) {
    models[k] = build_ecdf(ref.column(ref_cols[k]), options, ref.columns()[ref_cols[k]]);
  });
  return map_pvalues(models, test, workers);
}

}  // namespace nullstat
