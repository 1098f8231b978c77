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

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "nullstat/detail/binary_io.hpp"
#include "nullstat/detail/digest.hpp"
#include "nullstat/detail/file_io.hpp"
#include "nullstat/error.hpp"
#include "nullstat/pipeline.hpp"

namespace nullstat {

// File layout:
//   8 bytes  magic "NSTATCAL"
//   u32      format version
//   u64      payload length
//   32 bytes SHA-256 of the payload
//   payload: u32-length-prefixed JSON metadata, then per column
//            u32 n_bins, u64 n_samples, f64 clamp_epsilon,
//            f64[n_bins + 1] edges, f64[n_bins] cumulative fractions.
inline constexpr char kArtifactMagic[8] = {'N', 'S', 'T', 'A', 'T', 'C', 'A', 'L'};
inline constexpr std::uint32_t kArtifactFormatVersion = 1;
inline constexpr std::size_t kArtifactHeaderSize = 8 + 4 + 8 + 32;

namespace detail {

inline nlohmann::json hyperparameters_to_json(const Hyperparameters& hp) {
  nlohmann::json j;
  j["ecdf_bins"] = hp.ecdf_bins;
  j["chi2_bins"] = hp.chi2_bins;
  j["v_threshold"] = hp.v_threshold;
  j["alpha_ks"] = hp.alpha_ks;
  j["ks_subsample"] = hp.ks_subsample;
  j["seed"] = hp.seed;
  j["aggregator"] = std::string(to_string(hp.aggregator));
  j["preferred"] = hp.preferred;
  j["clamp_epsilon"] = hp.clamp_epsilon ? nlohmann::json(*hp.clamp_epsilon) : nlohmann::json(nullptr);
  return j;
}

inline Hyperparameters hyperparameters_from_json(const nlohmann::json& j) {
  Hyperparameters hp;
  hp.ecdf_bins = j.at("ecdf_bins").get<std::size_t>();
  hp.chi2_bins = j.at("chi2_bins").get<std::size_t>();
  hp.v_threshold = j.at("v_threshold").get<double>();
  hp.alpha_ks = j.at("alpha_ks").get<double>();
  hp.ks_subsample = j.at("ks_subsample").get<std::size_t>();
  hp.seed = j.at("seed").get<std::uint64_t>();
  hp.aggregator = parse_aggregator(j.at("aggregator").get<std::string>());
  hp.preferred = j.at("preferred").get<std::vector<std::string>>();
  if (!j.at("clamp_epsilon").is_null()) hp.clamp_epsilon = j.at("clamp_epsilon").get<double>();
  return hp;
}

inline nlohmann::json metadata_to_json(const CalibrationArtifact& a) {
  nlohmann::json j;
  j["format"] = "nullstat-calibration";
  auto& cols = j["columns"] = nlohmann::json::array();
  for (const auto& m : a.ecdfs) {
    const auto& id = m.statistic();
    cols.push_back({{"extractor", id.extractor_name}, {"tag", id.parameter_tag}, {"display", id.display_name}});
  }
  const auto& s = a.selected;
  j["selected"] = {{"members", s.members},
                   {"ks_pvalue", s.ks_pvalue},
                   {"ks_statistic", s.ks_statistic},
                   {"preferred_hits", s.preferred_hits},
                   {"degraded", s.degraded},
                   {"n_candidates", s.n_candidates},
                   {"n_passing", s.n_passing}};
  j["aggregator"] = {{"method", std::string(to_string(a.aggregator.method))}, {"k", a.aggregator.k}};
  j["hyperparameters"] = hyperparameters_to_json(a.hyperparameters);
  j["provenance"] = {{"source_digest", a.provenance.source_digest},
                     {"tool_version", a.provenance.tool_version},
                     {"timestamp", a.provenance.timestamp},
                     {"matrix_format_version", a.provenance.matrix_format_version}};
  j["warnings"] = a.warnings;
  return j;
}

}  // namespace detail

inline std::string encode_artifact(const CalibrationArtifact& a) {
  detail::ByteWriter payload;
  payload.str(detail::metadata_to_json(a).dump());
  for (const auto& m : a.ecdfs) {
    payload.u32(static_cast<std::uint32_t>(m.n_bins()));
    payload.u64(m.n_samples());
    payload.f64(m.clamp_epsilon());
    payload.bytes(m.bin_edges().data(), m.bin_edges().size() * sizeof(double));
    payload.bytes(m.cumulative_fraction().data(), m.cumulative_fraction().size() * sizeof(double));
  }
  const std::string body = std::move(payload).take();
  const auto digest = detail::sha256(body);

  detail::ByteWriter out;
  out.bytes(kArtifactMagic, sizeof kArtifactMagic);
  out.u32(kArtifactFormatVersion);
  out.u64(body.size());
  out.bytes(digest.data(), digest.size());
  out.bytes(body.data(), body.size());
  return std::move(out).take();
}

/// Hex SHA-256 of the artifact payload, as stored in the file header.
inline std::string artifact_digest(const CalibrationArtifact& a) {
  const std::string encoded = encode_artifact(a);
  return detail::sha256_hex(std::string_view(encoded).substr(kArtifactHeaderSize));
}

/// Verifies magic, version, length and digest before decoding anything, so
/// a damaged file never yields a partial artifact.
inline CalibrationArtifact decode_artifact(std::string_view data) {
  if (data.size() >= sizeof kArtifactMagic &&
      std::memcmp(data.data(), kArtifactMagic, sizeof kArtifactMagic) != 0) {
    throw Error(ErrorCode::kParseError, "not a calibration artifact (bad magic)");
  }
  if (data.size() < kArtifactHeaderSize) {
    throw Error(ErrorCode::kDigestMismatch, "artifact truncated inside header");
  }
  detail::ByteReader header(data.substr(0, kArtifactHeaderSize));
  char magic[sizeof kArtifactMagic];
  header.bytes(magic, sizeof magic);
  const auto version = header.u32();
  if (version != kArtifactFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "artifact format version " + std::to_string(version) + ", expected " +
                    std::to_string(kArtifactFormatVersion));
  }
  const auto length = header.u64();
  detail::Sha256 stored;
  header.bytes(stored.data(), stored.size());
  const std::string_view body = data.substr(kArtifactHeaderSize);
  if (body.size() != length || detail::sha256(body) != stored) {
    throw Error(ErrorCode::kDigestMismatch, "artifact payload does not match its digest");
  }

  detail::ByteReader r(body);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(r.str());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("artifact metadata: ") + e.what());
  }

  CalibrationArtifact a;
  try {
    const auto& cols = meta.at("columns");
    for (const auto& c : cols) {
      StatisticId id{c.at("extractor").get<std::string>(), c.at("tag").get<std::string>(),
                     c.at("display").get<std::string>()};
      const auto n_bins = r.u32();
      const auto n_samples = r.u64();
      const double eps = r.f64();
      std::vector<double> edges(n_bins + std::size_t{1}), cumulative(n_bins);
      r.bytes(edges.data(), edges.size() * sizeof(double));
      r.bytes(cumulative.data(), cumulative.size() * sizeof(double));
      a.ecdfs.emplace_back(std::move(id), std::move(edges), std::move(cumulative), n_samples, eps);
    }
    const auto& s = meta.at("selected");
    a.selected.members = s.at("members").get<Clique>();
    for (std::size_t m : a.selected.members) {
      if (m >= a.ecdfs.size()) throw Error(ErrorCode::kParseError, "selected member out of range");
      a.selected.member_ids.push_back(a.ecdfs[m].statistic());
    }
    a.selected.ks_pvalue = s.at("ks_pvalue").get<double>();
    a.selected.ks_statistic = s.at("ks_statistic").get<double>();
    a.selected.preferred_hits = s.at("preferred_hits").get<std::size_t>();
    a.selected.degraded = s.at("degraded").get<bool>();
    a.selected.n_candidates = s.at("n_candidates").get<std::size_t>();
    a.selected.n_passing = s.at("n_passing").get<std::size_t>();
    a.aggregator.method = parse_aggregator(meta.at("aggregator").at("method").get<std::string>());
    a.aggregator.k = meta.at("aggregator").at("k").get<std::size_t>();
    a.hyperparameters = detail::hyperparameters_from_json(meta.at("hyperparameters"));
    const auto& p = meta.at("provenance");
    a.provenance.source_digest = p.at("source_digest").get<std::string>();
    a.provenance.tool_version = p.at("tool_version").get<std::string>();
    a.provenance.timestamp = p.at("timestamp").get<std::string>();
    a.provenance.matrix_format_version = p.at("matrix_format_version").get<std::uint32_t>();
    a.warnings = meta.at("warnings").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("artifact metadata: ") + e.what());
  }
  if (r.remaining() != 0) throw Error(ErrorCode::kParseError, "trailing bytes after ECDF tables");
  return a;
}

inline void save_artifact(const CalibrationArtifact& a, const std::filesystem::path& path) {
  detail::write_file(path, encode_artifact(a));
}

inline CalibrationArtifact load_artifact(const std::filesystem::path& path) {
  return decode_artifact(detail::read_file(path));
}

}  // namespace nullstat
