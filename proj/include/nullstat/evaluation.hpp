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
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "nullstat/detail/random.hpp"
#include "nullstat/error.hpp"
#include "nullstat/independence.hpp"
#include "nullstat/ks.hpp"
#include "nullstat/stat_matrix.hpp"

namespace nullstat {

/// Seeds used for every repeated benchmark and evaluation split.
inline const std::vector<std::uint64_t> kDefaultSeeds = {0, 8, 12, 18, 22, 28, 30, 32, 36, 38};

/// FAKE is the positive class; higher scores mean "more likely fake".
struct ScoredSample {
  std::string sample_id;
  double score = 0.0;
  Label label = Label::kUnknown;
};

inline ScoredSample score_from_pvalue(std::string sample_id, double unified_pvalue, Label label) {
  return {std::move(sample_id), 1.0 - unified_pvalue, label};
}

/// Mann-Whitney AUC: P(score_fake > score_real) + 0.5 P(tie). UNKNOWN rows are
/// ignored.
inline double auc(std::span<const ScoredSample> samples) {
  std::vector<const ScoredSample*> order;
  for (const auto& s : samples) {
    if (s.label != Label::kUnknown) order.push_back(&s);
  }
  std::sort(order.begin(), order.end(),
            [](const ScoredSample* a, const ScoredSample* b) { return a->score < b->score; });
  double numerator = 0.0;
  std::uint64_t neg_below = 0, n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t pos = 0, neg = 0;
    for (; j < order.size() && order[j]->score == order[i]->score; ++j) {
      (order[j]->label == Label::kFake ? pos : neg)++;
    }
    numerator += static_cast<double>(pos) *
                 (static_cast<double>(neg_below) + 0.5 * static_cast<double>(neg));
    neg_below += neg;
    n_pos += pos;
    n_neg += neg;
    i = j;
  }
  if (n_pos == 0 || n_neg == 0) {
    throw Error(ErrorCode::kSingleClassInput, "AUC needs both REAL and FAKE samples");
  }
  return numerator / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

/// Ranking order used by average_precision: score descending, ties by
/// sample_id ascending.
inline bool ranks_before(const ScoredSample& a, const ScoredSample& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.sample_id < b.sample_id;
}

/// AP = sum_k (R_k - R_{k-1}) P_k over the ranking, i.e. the mean of the
/// precision at each FAKE sample's rank. UNKNOWN rows are ignored.
inline double average_precision(std::span<const ScoredSample> samples) {
  std::vector<const ScoredSample*> order;
  for (const auto& s : samples) {
    if (s.label != Label::kUnknown) order.push_back(&s);
  }
  std::sort(order.begin(), order.end(),
            [](const ScoredSample* a, const ScoredSample* b) { return ranks_before(*a, *b); });
  double precision_sum = 0.0;
  std::uint64_t tp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (order[k]->label != Label::kFake) continue;
    ++tp;
    precision_sum += static_cast<double>(tp) / static_cast<double>(k + 1);
  }
  if (tp == 0) throw Error(ErrorCode::kNoPositives, "AP needs at least one FAKE sample");
  return precision_sum / static_cast<double>(tp);
}

struct EvaluationSubset {
  std::string generator;
  std::vector<std::size_t> indices;  // into the scored-sample list
};

/// For each generator tag carried by FAKE samples, draws equally many REAL
/// and FAKE samples (the smaller of the two pools) under `seed`. REAL samples
/// form one pool shared by all generators; their tags are ignored.
inline std::vector<EvaluationSubset> balanced_splits(std::span<const ScoredSample> samples,
                                                     std::span<const std::string> generators,
                                                     std::uint64_t seed) {
  if (generators.size() != samples.size()) {
    throw Error(ErrorCode::kLengthMismatch, "one generator tag per sample is required");
  }
  std::vector<std::size_t> reals;
  std::map<std::string, std::vector<std::size_t>> fakes;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].label == Label::kReal) reals.push_back(i);
    if (samples[i].label == Label::kFake) fakes[generators[i]].push_back(i);
  }
  if (fakes.empty()) throw Error(ErrorCode::kInsufficientSamples, "no FAKE samples");

  auto engine = detail::make_engine(seed);
  std::vector<EvaluationSubset> out;
  for (const auto& [gen, pool] : fakes) {
    const std::size_t n = std::min(reals.size(), pool.size());
    if (n == 0) {
      throw Error(ErrorCode::kInsufficientSamples, "generator '" + gen + "' has no REAL counterpart");
    }
    EvaluationSubset subset{gen, {}};
    for (std::size_t i : detail::sample_without_replacement(reals.size(), n, engine)) {
      subset.indices.push_back(reals[i]);
    }
    for (std::size_t i : detail::sample_without_replacement(pool.size(), n, engine)) {
      subset.indices.push_back(pool[i]);
    }
    std::sort(subset.indices.begin(), subset.indices.end());
    out.push_back(std::move(subset));
  }
  return out;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

inline MeanStd mean_std(std::span<const double> xs) {
  if (xs.empty()) return {};
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

/// Scores of one detection method; every method must list the same samples
/// in the same order.
struct MethodScores {
  std::string method;
  std::vector<ScoredSample> samples;
};

struct GeneratorMetrics {
  std::string generator;
  std::vector<MeanStd> auc;  // per method, over seeds
  std::vector<MeanStd> ap;
};

struct MetricTable {
  std::vector<std::string> methods;
  std::vector<GeneratorMetrics> rows;
  std::vector<MeanStd> auc_over_generators;  // "Average" and "Std" rows
  std::vector<MeanStd> ap_over_generators;
};

/// Per-generator AUC/AP averaged over balanced splits drawn with each seed,
/// followed by mean and standard deviation across generators.
inline MetricTable evaluate_generators(std::span<const MethodScores> methods,
                                       std::span<const std::string> generators,
                                       std::span<const std::uint64_t> seeds) {
  if (methods.empty()) throw Error(ErrorCode::kEmptyInput, "no methods to evaluate");
  if (seeds.empty()) throw Error(ErrorCode::kEmptyInput, "no seeds");
  const auto& base = methods.front().samples;
  for (const auto& m : methods) {
    if (m.samples.size() != base.size()) throw Error(ErrorCode::kLengthMismatch, "methods differ in sample count");
    for (std::size_t i = 0; i < base.size(); ++i) {
      if (m.samples[i].sample_id != base[i].sample_id || m.samples[i].label != base[i].label) {
        throw Error(ErrorCode::kInvalidArgument, "methods must list identical samples in order");
      }
    }
  }

  MetricTable table;
  for (const auto& m : methods) table.methods.push_back(m.method);
  // generator -> method -> per-seed values
  std::map<std::string, std::vector<std::vector<double>>> auc_vals, ap_vals;
  for (std::uint64_t seed : seeds) {
    for (const auto& subset : balanced_splits(base, generators, seed)) {
      auto& av = auc_vals[subset.generator];
      auto& pv = ap_vals[subset.generator];
      av.resize(methods.size());
      pv.resize(methods.size());
      for (std::size_t k = 0; k < methods.size(); ++k) {
        std::vector<ScoredSample> chosen;
        chosen.reserve(subset.indices.size());
        for (std::size_t i : subset.indices) chosen.push_back(methods[k].samples[i]);
        av[k].push_back(auc(chosen));
        pv[k].push_back(average_precision(chosen));
      }
    }
  }
  for (const auto& [gen, per_method] : auc_vals) {
    GeneratorMetrics row{gen, {}, {}};
    for (std::size_t k = 0; k < methods.size(); ++k) {
      row.auc.push_back(mean_std(per_method[k]));
      row.ap.push_back(mean_std(ap_vals[gen][k]));
    }
    table.rows.push_back(std::move(row));
  }
  for (std::size_t k = 0; k < methods.size(); ++k) {
    std::vector<double> a, p;
    for (const auto& row : table.rows) {
      a.push_back(row.auc[k].mean);
      p.push_back(row.ap[k].mean);
    }
    table.auc_over_generators.push_back(mean_std(a));
    table.ap_over_generators.push_back(mean_std(p));
  }
  return table;
}

/// CSV with columns generator, auc_<method>..., ap_<method>..., one row per
/// generator followed by "average" and "std" rows.
inline std::string metric_table_csv(const MetricTable& t) {
  const auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  std::string out = "generator";
  for (const auto& m : t.methods) out += ",auc_" + m;
  for (const auto& m : t.methods) out += ",ap_" + m;
  out += "\n";
  for (const auto& row : t.rows) {
    out += row.generator;
    for (const auto& v : row.auc) out += "," + fmt(v.mean);
    for (const auto& v : row.ap) out += "," + fmt(v.mean);
    out += "\n";
  }
  out += "average";
  for (const auto& v : t.auc_over_generators) out += "," + fmt(v.mean);
  for (const auto& v : t.ap_over_generators) out += "," + fmt(v.mean);
  out += "\nstd";
  for (const auto& v : t.auc_over_generators) out += "," + fmt(v.std);
  for (const auto& v : t.ap_over_generators) out += "," + fmt(v.std);
  out += "\n";
  return out;
}

struct UniformityReport {
  double ks_statistic = 0.0;
  double ks_pvalue = 1.0;
  std::size_t n = 0;
  std::array<std::size_t, 20> histogram{};  // right-closed cells of width 0.05
};

/// Calibration-health probe: KS distance of p-values to U[0,1] and a
/// 20-cell histogram.
inline UniformityReport uniformity_report(std::span<const double> pvalues) {
  if (pvalues.empty()) throw Error(ErrorCode::kEmptyInput, "no p-values");
  UniformityReport r;
  const auto ks = ks_test_uniform(pvalues);
  r.ks_statistic = ks.statistic;
  r.ks_pvalue = ks.pvalue;
  r.n = pvalues.size();
  for (auto cell : bin_unit_interval(pvalues, r.histogram.size())) ++r.histogram[cell];
  return r;
}

}  // namespace nullstat
