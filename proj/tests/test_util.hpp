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

#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "nullstat/error.hpp"
#include "nullstat/stat_matrix.hpp"

namespace nullstat::testing {

/// Runs fn and checks it throws nullstat::Error carrying `code`.
template <class Fn>
::testing::AssertionResult throws_code(Fn&& fn, ErrorCode code) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.code() == code) return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << "threw " << to_string(e.code()) << ": " << e.what();
  } catch (const std::exception& e) {
    return ::testing::AssertionFailure() << "threw non-nullstat exception: " << e.what();
  }
  return ::testing::AssertionFailure() << "did not throw";
}

inline std::vector<double> uniform_draws(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& v : out) v = unit(rng);
  return out;
}

/// Matrix with named columns "c0.x", "c1.x", ... holding the given columns.
inline StatisticsMatrix matrix_from_columns(const std::vector<std::vector<double>>& cols,
                                            Label label = Label::kReal,
                                            const std::string& prefix = "r") {
  const std::size_t n = cols.empty() ? 0 : cols.front().size();
  std::vector<std::string> ids(n);
  for (std::size_t r = 0; r < n; ++r) ids[r] = prefix + std::to_string(r);
  std::vector<StatisticId> columns;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    columns.push_back(StatisticId::make("c" + std::to_string(c), "x"));
  }
  std::vector<double> values(n * cols.size());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) values[r * cols.size() + c] = cols[c][r];
  }
  return StatisticsMatrix(std::move(ids), std::vector<Label>(n, label), std::move(columns),
                          std::move(values));
}

}  // namespace nullstat::testing
