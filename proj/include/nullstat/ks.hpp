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

#include "nullstat/detail/random.hpp"
#include "nullstat/error.hpp"

namespace nullstat {

struct KsResult {
  double statistic = 0.0;  // D = sup_t |F_n(t) - t|
  double pvalue = 1.0;
  std::size_t n = 0;
};

/// One-sample KS distance to U[0,1].
inline double ks_statistic_uniform(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "KS test needs at least one value");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double u = std::clamp(sorted[i], 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - u, u - static_cast<double>(i) / n});
  }
  return d;
}

/// Survival function of the Kolmogorov distribution, Q(z) = P(K > z).
inline double kolmogorov_survival(double z) {
  if (z <= 0.0) return 1.0;
  if (z < 1.18) {
    const double w = 1.23370055013616983 / (z * z);  // pi^2 / (8 z^2)
    const double y = std::exp(-w);
    const double cdf = 2.25675833419102515 * std::sqrt(w) *
                       (y + std::pow(y, 9) + std::pow(y, 25) + std::pow(y, 49));
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  const double x = std::exp(-2.0 * z * z);
  return std::clamp(2.0 * (x - std::pow(x, 4) + std::pow(x, 9)), 0.0, 1.0);
}

/// Asymptotic p-value for distance d over n points, with Stephens'
/// finite-sample scaling (sqrt(n) + 0.12 + 0.11 / sqrt(n)).
inline double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  return kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
}

inline KsResult ks_test_uniform(std::span<const double> values) {
  KsResult r;
  r.n = values.size();
  r.statistic = ks_statistic_uniform(values);
  r.pvalue = ks_pvalue(r.statistic, r.n);
  return r;
}

/// Row indices used by ks_uniformity for a population of size n.
inline std::vector<std::size_t> ks_subsample_indices(std::size_t n, std::size_t subsample,
                                                     std::uint64_t seed) {
  if (subsample == 0 || subsample >= n) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  auto idx = detail::sample_without_replacement(n, subsample, seed);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// KS uniformity test on min(subsample, n) values drawn without replacement
/// under `seed`. A subsample of 0 uses every value.
inline KsResult ks_uniformity(std::span<const double> pvalues, std::size_t subsample,
                              std::uint64_t seed) {
  if (pvalues.empty()) throw Error(ErrorCode::kEmptyInput, "KS test needs at least one value");
  const auto idx = ks_subsample_indices(pvalues.size(), subsample, seed);
  std::vector<double> drawn;
  drawn.reserve(idx.size());
  for (std::size_t i : idx) drawn.push_back(pvalues[i]);
  return ks_test_uniform(drawn);
}

}  // namespace nullstat
