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
#include <limits>
#include <span>
#include <string>
#include <string_view>

#include "nullstat/error.hpp"
#include "nullstat/normal.hpp"

namespace nullstat {

enum class Aggregator { kStouffer, kMinP };

constexpr std::string_view to_string(Aggregator a) {
  return a == Aggregator::kStouffer ? "stouffer" : "minp";
}

inline Aggregator parse_aggregator(std::string_view s) {
  if (s == "stouffer") return Aggregator::kStouffer;
  if (s == "minp" || s == "min_p" || s == "min-p") return Aggregator::kMinP;
  throw Error(ErrorCode::kInvalidArgument, "unknown aggregator '" + std::string(s) + "'");
}

struct AggregatorConfig {
  Aggregator method = Aggregator::kMinP;
  std::size_t k = 1;

  friend bool operator==(const AggregatorConfig&, const AggregatorConfig&) = default;
};

/// Inputs equal to 1 are moved to 1 - kUpperNudge before the normal quantile.
inline constexpr double kUpperNudge = 1e-12;

namespace detail {

inline void check_pvalues(std::span<const double> pvalues) {
  if (pvalues.empty()) throw Error(ErrorCode::kEmptyInput, "no p-values to aggregate");
  for (double p : pvalues) {
    if (!(p > 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::kOutOfRangePValue,
                  "p-value " + std::to_string(p) + " outside (0, 1]");
    }
  }
}

}  // namespace detail

/// Stouffer's Z: Phi( sum_i Phi^-1(p_i) / sqrt(K) ).
inline double stouffer(std::span<const double> pvalues) {
  detail::check_pvalues(pvalues);
  double z = 0.0;
  for (double p : pvalues) z += normal_quantile(std::min(p, 1.0 - kUpperNudge));
  const double combined = normal_cdf(z / std::sqrt(static_cast<double>(pvalues.size())));
  return std::max(combined, std::numeric_limits<double>::min());
}

/// Minimum p-value passed through its null CDF: 1 - (1 - min_i p_i)^K.
inline double min_p(std::span<const double> pvalues) {
  detail::check_pvalues(pvalues);
  const double pmin = *std::min_element(pvalues.begin(), pvalues.end());
  const auto k = static_cast<double>(pvalues.size());
  return std::clamp(-std::expm1(k * std::log1p(-pmin)), 0.0, 1.0);
}

inline double aggregate(Aggregator method, std::span<const double> pvalues) {
  return method == Aggregator::kStouffer ? stouffer(pvalues) : min_p(pvalues);
}

}  // namespace nullstat
