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
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "nullstat/cliques.hpp"
#include "nullstat/detail/random.hpp"
#include "nullstat/ecdf.hpp"
#include "nullstat/error.hpp"
#include "nullstat/evaluation.hpp"
#include "nullstat/independence.hpp"
#include "nullstat/ks.hpp"
#include "nullstat/pipeline.hpp"
#include "nullstat/stat_matrix.hpp"

namespace nullstat {

enum class BaseDistribution {
  kUniform,          // U[0, 1]
  kGaussianMixture,  // 0.5 N(-1, 0.5^2) + 0.5 N(1, 0.5^2), heavier structure in the tails
};

/// n_independent base columns, each followed by n_correlated_copies noisy
/// copies (base + N(0, copy_noise_sigma^2), clipped to [0, 1] for a uniform base).
struct ColumnGroup {
  std::size_t n_independent = 1;
  std::size_t n_correlated_copies = 0;
  double copy_noise_sigma = 0.0;
};

/// Applied to the fake matrix only: v -> v * scale + shift on each listed
/// column index.
struct FakeShift {
  std::vector<std::size_t> shifted_columns;
  double shift = 0.0;
  double scale = 1.0;
};

struct SyntheticSpec {
  std::size_t n_samples = 10000;
  std::size_t n_fake_samples = 0;  // 0 means n_samples
  std::vector<ColumnGroup> groups = {ColumnGroup{}};
  FakeShift fake_shift;
  BaseDistribution base = BaseDistribution::kUniform;
  /// Gaussian jitter added to every uniform base value before clipping.
  double perturbation_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  StatisticsMatrix real;
  StatisticsMatrix fake;
};

namespace detail {

inline std::vector<StatisticId> synthetic_columns(const SyntheticSpec& spec) {
  std::vector<StatisticId> cols;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    for (std::size_t i = 0; i < spec.groups[g].n_independent; ++i) {
      const std::string base = "s" + std::to_string(i);
      cols.push_back(StatisticId::make("g" + std::to_string(g), base));
      for (std::size_t k = 1; k <= spec.groups[g].n_correlated_copies; ++k) {
        cols.push_back(StatisticId::make("g" + std::to_string(g), base + "c" + std::to_string(k)));
      }
    }
  }
  return cols;
}

inline std::vector<std::vector<double>> synthetic_block(const SyntheticSpec& spec, std::size_t n,
                                                        std::mt19937_64& engine) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool uniform = spec.base == BaseDistribution::kUniform;
  const auto draw_base = [&] {
    if (uniform) {
      double v = unit(engine);
      if (spec.perturbation_sigma > 0.0) v = std::clamp(v + spec.perturbation_sigma * normal(engine), 0.0, 1.0);
      return v;
    }
    const double center = unit(engine) < 0.5 ? -1.0 : 1.0;
    return center + 0.5 * normal(engine);
  };

  std::vector<std::vector<double>> cols;
  for (const auto& group : spec.groups) {
    for (std::size_t i = 0; i < group.n_independent; ++i) {
      std::vector<double> base(n);
      for (auto& v : base) v = draw_base();
      cols.push_back(base);
      for (std::size_t k = 0; k < group.n_correlated_copies; ++k) {
        std::vector<double> copy(n);
        for (std::size_t r = 0; r < n; ++r) {
          const double v = base[r] + group.copy_noise_sigma * normal(engine);
          copy[r] = uniform ? std::clamp(v, 0.0, 1.0) : v;
        }
        cols.push_back(std::move(copy));
      }
    }
  }
  return cols;
}

inline StatisticsMatrix to_matrix(const std::vector<std::vector<double>>& cols,
                                  std::vector<StatisticId> ids, const std::string& prefix,
                                  Label label, std::size_t n) {
  std::vector<std::string> sample_ids(n);
  for (std::size_t r = 0; r < n; ++r) sample_ids[r] = prefix + std::to_string(r);
  std::vector<double> values(n * cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (std::size_t r = 0; r < n; ++r) values[r * cols.size() + c] = cols[c][r];
  }
  return StatisticsMatrix(std::move(sample_ids), std::vector<Label>(n, label), std::move(ids),
                          std::move(values));
}

}  // namespace detail

/// Real and fake statistic matrices drawn from the spec; deterministic in seed.
inline SyntheticData generate(const SyntheticSpec& spec) {
  std::size_t total = 0;
  for (const auto& g : spec.groups) {
    if (!(g.copy_noise_sigma >= 0.0)) throw Error(ErrorCode::kInvalidSpec, "copy_noise_sigma must be >= 0");
    total += g.n_independent * (1 + g.n_correlated_copies);
  }
  if (total == 0) throw Error(ErrorCode::kInvalidSpec, "spec produces no columns");
  if (spec.n_samples == 0) throw Error(ErrorCode::kInvalidSpec, "n_samples must be positive");
  if (!(spec.perturbation_sigma >= 0.0)) throw Error(ErrorCode::kInvalidSpec, "perturbation_sigma must be >= 0");
  if (!std::isfinite(spec.fake_shift.shift) || !std::isfinite(spec.fake_shift.scale)) {
    throw Error(ErrorCode::kInvalidSpec, "fake shift and scale must be finite");
  }
  for (std::size_t c : spec.fake_shift.shifted_columns) {
    if (c >= total) throw Error(ErrorCode::kInvalidSpec, "shifted column index out of range");
  }

  const auto ids = detail::synthetic_columns(spec);
  const std::size_t n_fake = spec.n_fake_samples == 0 ? spec.n_samples : spec.n_fake_samples;
  auto real_engine = detail::make_engine(spec.seed, 1);
  auto fake_engine = detail::make_engine(spec.seed, 2);
  auto real_cols = detail::synthetic_block(spec, spec.n_samples, real_engine);
  auto fake_cols = detail::synthetic_block(spec, n_fake, fake_engine);
  for (std::size_t c : spec.fake_shift.shifted_columns) {
    for (auto& v : fake_cols[c]) v = v * spec.fake_shift.scale + spec.fake_shift.shift;
  }
  return {detail::to_matrix(real_cols, ids, "real-", Label::kReal, spec.n_samples),
          detail::to_matrix(fake_cols, ids, "fake-", Label::kFake, n_fake)};
}

/// Named specs used by the CLI `simulate` command.
///   lemma-check     8 independent uniform columns, fakes drawn from the null
///   dependent-copy  6 independent columns, the first with a sigma=0.01 copy
///   single-shift    8 columns, fakes shifted by +0.3 on column 0 only
///   broad-shift     8 columns, fakes shifted by +0.04 on every column
inline SyntheticSpec preset(const std::string& name, std::size_t n_samples, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n_samples = n_samples;
  spec.seed = seed;
  if (name == "lemma-check") {
    spec.groups = {{8, 0, 0.0}};
  } else if (name == "dependent-copy") {
    spec.groups = {{1, 1, 0.01}, {5, 0, 0.0}};
  } else if (name == "single-shift") {
    spec.groups = {{8, 0, 0.0}};
    spec.fake_shift = {{0}, 0.3, 1.0};
  } else if (name == "broad-shift") {
    spec.groups = {{8, 0, 0.0}};
    spec.fake_shift = {{0, 1, 2, 3, 4, 5, 6, 7}, 0.04, 1.0};
  } else {
    throw Error(ErrorCode::kInvalidSpec, "unknown preset '" + name + "'");
  }
  return spec;
}

/// Timing of the independence-selection stage for T synthetic statistics.
struct ScalingRow {
  std::size_t n_stats = 0;
  double cramers_v_ms = 0.0;
  double graph_clique_ms = 0.0;
  std::size_t n_edges = 0;
  std::size_t n_cliques = 0;
};

/// For each T, draws T uniform columns of n_samples values (with a small
/// jitter) and times the Cramer's V matrix and graph + maximal-clique
/// enumeration separately, single-threaded; each time is the median of
/// `repetitions` runs.
inline std::vector<ScalingRow> bench_clique_scaling(const std::vector<std::size_t>& n_stats_list,
                                                    std::size_t n_samples, std::uint64_t seed,
                                                    std::size_t repetitions = 5,
                                                    std::size_t chi2_bins = 15,
                                                    double v_threshold = 0.07) {
  using Clock = std::chrono::steady_clock;
  const auto ms_since = [](Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  };
  const auto median = [](std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
  };
  repetitions = std::max<std::size_t>(1, repetitions);

  std::vector<ScalingRow> out;
  for (std::size_t t : n_stats_list) {
    if (t < 2) throw Error(ErrorCode::kInvalidArgument, "bench needs at least two statistics");
    auto engine = detail::make_engine(seed, t);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, 1e-3);
    PValueMatrix pvals;
    for (std::size_t c = 0; c < t; ++c) {
      pvals.columns.push_back(StatisticId::make("bench", "s" + std::to_string(c)));
      std::vector<double> col(n_samples);
      for (auto& v : col) v = std::clamp(unit(engine) + jitter(engine), 0.0, 1.0);
      pvals.data.push_back(std::move(col));
    }

    ScalingRow row;
    row.n_stats = t;
    std::vector<double> v_times, g_times;
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
      auto start = Clock::now();
      const auto dep = build_dependence_matrix(pvals, chi2_bins, 1);
      v_times.push_back(ms_since(start));

      start = Clock::now();
      const auto graph = build_graph(dep, v_threshold);
      const auto cliques = enumerate_maximal_cliques(graph);
      g_times.push_back(ms_since(start));
      row.n_edges = graph.edge_count();
      row.n_cliques = cliques.size();
    }
    row.cramers_v_ms = median(v_times);
    row.graph_clique_ms = median(g_times);
    out.push_back(row);
  }
  return out;
}

inline std::string scaling_csv(const std::vector<ScalingRow>& rows) {
  std::string out = "T,cramers_v_ms,graph_clique_ms\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.3f,%.3f\n", r.n_stats, r.cramers_v_ms, r.graph_clique_ms);
    out += buf;
  }
  return out;
}

/// AUC of unified p-values (score 1 - p) for real vs fake test rows.
inline double detection_auc(const CalibrationArtifact& artifact, const StatisticsMatrix& real,
                            const StatisticsMatrix& fake) {
  std::vector<ScoredSample> scored;
  for (const auto* m : {&real, &fake}) {
    for (const auto& r : infer(artifact, *m)) {
      scored.push_back(score_from_pvalue(r.sample_id, r.unified_pvalue, r.label));
    }
  }
  return auc(scored);
}

inline std::vector<double> unified_pvalues(const CalibrationArtifact& artifact,
                                           const StatisticsMatrix& test) {
  std::vector<double> out;
  for (const auto& r : infer(artifact, test)) out.push_back(r.unified_pvalue);
  return out;
}

struct DomainShiftOptions {
  std::size_t n_stats = 4;
  std::size_t reference_rows = 1000;
  std::size_t test_rows = 30000;
  std::size_t control_rows = 500;
  double real_shift = 0.05;         // test-domain reals: v + real_shift
  double fake_shift = 0.5;          // fakes in the reference domain
  double shifted_fake_shift = 0.6;  // fakes in the shifted domain
};

struct DomainShiftReport {
  double auc_calibrated = 0.0;
  double auc_shifted = 0.0;
  double ks_real_shifted = 1.0;  // KS p-value of shifted-real unified p-values
  double ks_real_control = 1.0;  // same, unshifted reals, control_rows of them
};

/// Small-reference miniature of a domain shift: calibrate on a small uniform
/// reference, then compare in-domain and shifted test populations.
inline DomainShiftReport domain_shift_miniature(std::uint64_t seed, const DomainShiftOptions& o = {}) {
  const auto draw = [&](std::size_t n, std::uint64_t stream, double shift, Label label,
                        const std::string& prefix) {
    SyntheticSpec spec;
    spec.n_samples = n;
    spec.groups = {{o.n_stats, 0, 0.0}};
    spec.seed = seed * 1000003 + stream;
    auto cols = [&] {
      auto engine = detail::make_engine(spec.seed, stream);
      return detail::synthetic_block(spec, n, engine);
    }();
    for (auto& col : cols) {
      for (auto& v : col) v += shift;
    }
    return detail::to_matrix(cols, detail::synthetic_columns(spec), prefix, label, n);
  };

  const auto reference = draw(o.reference_rows, 1, 0.0, Label::kReal, "ref-");
  CalibrationConfig config;
  config.hyper.seed = seed;
  const auto artifact = calibrate(reference, config);

  DomainShiftReport report;
  const auto real_in = draw(o.test_rows, 2, 0.0, Label::kReal, "real-");
  const auto fake_in = draw(o.test_rows, 3, o.fake_shift, Label::kFake, "fake-");
  report.auc_calibrated = detection_auc(artifact, real_in, fake_in);

  const auto real_shifted = draw(o.test_rows, 4, o.real_shift, Label::kReal, "real-");
  const auto fake_shifted = draw(o.test_rows, 5, o.shifted_fake_shift, Label::kFake, "fake-");
  report.auc_shifted = detection_auc(artifact, real_shifted, fake_shifted);
  report.ks_real_shifted = ks_test_uniform(unified_pvalues(artifact, real_shifted)).pvalue;

  const auto control = draw(o.control_rows, 6, 0.0, Label::kReal, "ctl-");
  report.ks_real_control = ks_test_uniform(unified_pvalues(artifact, control)).pvalue;
  return report;
}

}  // namespace nullstat
