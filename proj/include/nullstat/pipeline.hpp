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
#include <optional>
#include <string>
#include <vector>

#include "nullstat/aggregation.hpp"
#include "nullstat/detail/digest.hpp"
#include "nullstat/detail/parallel.hpp"
#include "nullstat/ecdf.hpp"
#include "nullstat/error.hpp"
#include "nullstat/independence.hpp"
#include "nullstat/selection.hpp"
#include "nullstat/stat_matrix.hpp"
#include "nullstat/version.hpp"

namespace nullstat {

/// Calibration hyperparameters. Defaults are the reference configuration.
struct Hyperparameters {
  std::size_t ecdf_bins = 400;
  std::size_t chi2_bins = 15;
  double v_threshold = 0.07;
  double alpha_ks = 0.05;
  std::size_t ks_subsample = 2000;
  std::uint64_t seed = 0;
  Aggregator aggregator = Aggregator::kMinP;
  std::vector<std::string> preferred;
  std::optional<double> clamp_epsilon;

  friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

struct CalibrationConfig {
  Hyperparameters hyper;
  std::size_t workers = 1;
  /// Recorded verbatim in the artifact; calibrate() never reads the clock so
  /// that identical inputs give byte-identical artifacts.
  std::string timestamp;
};

struct Provenance {
  std::string source_digest;  // SHA-256 of the reference matrix, binary encoding
  std::string tool_version;
  std::string timestamp;
  std::uint32_t matrix_format_version = kMatrixFormatVersion;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct CalibrationArtifact {
  std::vector<EcdfModel> ecdfs;  // one per reference column, in column order
  CliqueSelection selected;
  AggregatorConfig aggregator;
  Hyperparameters hyperparameters;
  Provenance provenance;
  std::vector<std::string> warnings;

  bool degraded() const { return selected.degraded; }

  const EcdfModel* find_ecdf(const StatisticId& id) const {
    for (const auto& m : ecdfs) {
      if (m.statistic().same_statistic(id)) return &m;
    }
    return nullptr;
  }

  friend bool operator==(const CalibrationArtifact&, const CalibrationArtifact&) = default;
};

/// Everything calibrate() computed on the way to the artifact.
struct CalibrationReport {
  CalibrationArtifact artifact;
  DependenceMatrix dependence;
  IndependenceGraph graph;
  std::vector<CliqueCandidate> candidates;
};

inline CalibrationReport calibrate_with_report(const StatisticsMatrix& ref,
                                               const CalibrationConfig& config) {
  const auto& hp = config.hyper;
  if (ref.rows() == 0) throw Error(ErrorCode::kEmptyReference, "reference matrix has no rows");
  if (ref.cols() == 0) throw Error(ErrorCode::kInvalidArgument, "reference matrix has no columns");
  for (std::size_t r = 0; r < ref.rows(); ++r) {
    if (ref.labels()[r] == Label::kFake) {
      throw Error(ErrorCode::kPreconditionViolated,
                  "reference row '" + ref.sample_ids()[r] + "' is labeled fake");
    }
  }
  if (ref.rows() < hp.chi2_bins) {
    throw Error(ErrorCode::kTooFewSamples, std::to_string(ref.rows()) + " rows is below the " +
                                               std::to_string(hp.chi2_bins) + "-row floor");
  }

  CalibrationReport report;
  auto& art = report.artifact;
  art.hyperparameters = hp;
  const std::size_t recommended = std::max(hp.ecdf_bins, hp.chi2_bins * 10);
  if (ref.rows() < recommended) {
    art.warnings.push_back("reference has " + std::to_string(ref.rows()) +
                           " rows; at least " + std::to_string(recommended) +
                           " are recommended for the configured bin counts");
  }

  EcdfOptions ecdf_options;
  ecdf_options.n_bins = hp.ecdf_bins;
  ecdf_options.clamp_epsilon = hp.clamp_epsilon;
  art.ecdfs = build_ecdfs(ref, ecdf_options, config.workers);
  const PValueMatrix pvals = map_pvalues(art.ecdfs, ref, config.workers);

  if (ref.cols() >= 2) {
    report.dependence = build_dependence_matrix(pvals, hp.chi2_bins, config.workers);
  } else {
    report.dependence = DependenceMatrix(ref.columns(), {0.0});
  }
  report.graph = build_graph(report.dependence, hp.v_threshold);

  SelectionOptions sel;
  sel.aggregator = hp.aggregator;
  sel.preferred = hp.preferred;
  sel.alpha_ks = hp.alpha_ks;
  sel.ks_subsample = hp.ks_subsample;
  sel.seed = hp.seed;
  report.candidates = evaluate_cliques(report.graph, pvals, sel);
  art.selected = choose_clique(report.graph, report.candidates);
  if (art.selected.degraded) {
    art.warnings.push_back("no maximal clique passed the KS uniformity filter; using the best-KS clique");
  }
  art.aggregator = {hp.aggregator, art.selected.members.size()};

  art.provenance.source_digest = detail::sha256_hex(encode_binary(ref));
  art.provenance.tool_version = std::string(kToolName) + " " + kVersion;
  art.provenance.timestamp = config.timestamp;
  art.provenance.matrix_format_version = kMatrixFormatVersion;
  return report;
}

/// Null-distribution modeling: ECDFs for every column plus the selected
/// jointly-independent statistic subset.
inline CalibrationArtifact calibrate(const StatisticsMatrix& ref, const CalibrationConfig& config = {}) {
  return calibrate_with_report(ref, config).artifact;
}

enum class Decision { kReal, kFake };

constexpr std::string_view to_string(Decision d) { return d == Decision::kFake ? "FAKE" : "REAL"; }

struct DetectionResult {
  std::string sample_id;
  Label label = Label::kUnknown;
  /// Ordered as CalibrationArtifact::selected.member_ids.
  std::vector<double> per_statistic_pvalues;
  double unified_pvalue = 1.0;
  Decision decision = Decision::kReal;
  double alpha = 0.05;
};

/// Maps the selected statistics of each test row through their ECDFs,
/// aggregates, and flags FAKE when the unified p-value is strictly below alpha.
inline std::vector<DetectionResult> infer(const CalibrationArtifact& artifact,
                                          const StatisticsMatrix& test, double alpha = 0.05,
                                          std::size_t workers = 1) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must be in (0, 1)");
  const auto& ids = artifact.selected.member_ids;
  if (ids.empty()) throw Error(ErrorCode::kInvalidArgument, "artifact selects no statistics");
  std::vector<const EcdfModel*> models;
  std::vector<std::size_t> cols;
  for (const auto& id : ids) {
    const EcdfModel* m = artifact.find_ecdf(id);
    if (!m) throw Error(ErrorCode::kInvalidArgument, "artifact lacks an ECDF for '" + id.key() + "'");
    const auto col = test.find_column(id);
    if (!col) throw Error(ErrorCode::kMissingColumn, "test matrix lacks statistic '" + id.key() + "'");
    models.push_back(m);
    cols.push_back(*col);
  }

  std::vector<DetectionResult> results(test.rows());
  const std::size_t n_chunks = std::max<std::size_t>(1, std::min<std::size_t>(workers, test.rows()));
  const std::size_t chunk = test.rows() == 0 ? 0 : (test.rows() + n_chunks - 1) / n_chunks;
  detail::parallel_for(n_chunks, workers, [&](std::size_t w) {
    const std::size_t end = std::min(test.rows(), (w + 1) * chunk);
    for (std::size_t r = w * chunk; r < end; ++r) {
      auto& res = results[r];
      res.sample_id = test.sample_ids()[r];
      res.label = test.labels()[r];
      res.per_statistic_pvalues.resize(models.size());
      for (std::size_t k = 0; k < models.size(); ++k) {
        res.per_statistic_pvalues[k] = models[k]->pvalue(test.at(r, cols[k]));
      }
      res.unified_pvalue = aggregate(artifact.aggregator.method, res.per_statistic_pvalues);
      res.alpha = alpha;
      res.decision = res.unified_pvalue < alpha ? Decision::kFake : Decision::kReal;
    }
  });
  return results;
}

}  // namespace nullstat
