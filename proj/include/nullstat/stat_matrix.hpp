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
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "nullstat/detail/binary_io.hpp"
#include "nullstat/detail/file_io.hpp"
#include "nullstat/detail/random.hpp"
#include "nullstat/error.hpp"

namespace nullstat {

enum class Label : std::uint8_t { kReal = 0, kFake = 1, kUnknown = 2 };

constexpr std::string_view to_string(Label label) {
  switch (label) {
    case Label::kReal: return "real";
    case Label::kFake: return "fake";
    case Label::kUnknown: return "unknown";
  }
  return "unknown";
}

inline Label parse_label(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "real") return Label::kReal;
  if (lower == "fake") return Label::kFake;
  if (lower == "unknown" || lower.empty()) return Label::kUnknown;
  throw Error(ErrorCode::kParseError, "unknown label '" + std::string(s) + "'");
}

/// Identifies one scalar statistic: the extractor that produced it plus a
/// parameter tag (e.g. a perturbation strength). Serialized as `name.tag`.
struct StatisticId {
  std::string extractor_name;
  std::string parameter_tag;
  std::string display_name;

  std::string key() const {
    return parameter_tag.empty() ? extractor_name : extractor_name + "." + parameter_tag;
  }

  /// Splits at the first '.'; a string without a dot has an empty tag.
  static StatisticId parse(std::string_view text) {
    StatisticId id;
    const auto dot = text.find('.');
    id.extractor_name = std::string(text.substr(0, dot));
    if (dot != std::string_view::npos) id.parameter_tag = std::string(text.substr(dot + 1));
    id.display_name = std::string(text);
    return id;
  }

  static StatisticId make(std::string extractor, std::string tag) {
    StatisticId id{std::move(extractor), std::move(tag), {}};
    id.display_name = id.key();
    return id;
  }

  bool same_statistic(const StatisticId& other) const {
    return extractor_name == other.extractor_name && parameter_tag == other.parameter_tag;
  }

  friend bool operator==(const StatisticId&, const StatisticId&) = default;
};

/// N samples by T named statistics, row-major. Immutable once constructed.
class StatisticsMatrix {
 public:
  StatisticsMatrix() = default;

  /// `labels` may be empty, meaning every row is unlabeled.
  StatisticsMatrix(std::vector<std::string> sample_ids, std::vector<Label> labels,
                   std::vector<StatisticId> columns, std::vector<double> values)
      : sample_ids_(std::move(sample_ids)),
        labels_(std::move(labels)),
        columns_(std::move(columns)),
        values_(std::move(values)) {
    if (labels_.empty()) labels_.assign(sample_ids_.size(), Label::kUnknown);
    validate();
  }

  std::size_t rows() const { return sample_ids_.size(); }
  std::size_t cols() const { return columns_.size(); }

  double at(std::size_t row, std::size_t col) const { return values_[row * cols() + col]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values_).subspan(r * cols(), cols());
  }
  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
    return out;
  }

  const std::vector<std::string>& sample_ids() const { return sample_ids_; }
  const std::vector<Label>& labels() const { return labels_; }
  const std::vector<StatisticId>& columns() const { return columns_; }
  const std::vector<double>& values() const { return values_; }

  bool has_labels() const {
    return std::any_of(labels_.begin(), labels_.end(),
                       [](Label l) { return l != Label::kUnknown; });
  }

  std::optional<std::size_t> find_column(const StatisticId& id) const {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (columns_[c].same_statistic(id)) return c;
    }
    return std::nullopt;
  }

  StatisticsMatrix select_rows(std::span<const std::size_t> indices) const {
    std::vector<std::string> ids;
    std::vector<Label> labels;
    std::vector<double> values;
    ids.reserve(indices.size());
    labels.reserve(indices.size());
    values.reserve(indices.size() * cols());
    for (std::size_t r : indices) {
      ids.push_back(sample_ids_.at(r));
      labels.push_back(labels_[r]);
      auto rv = row(r);
      values.insert(values.end(), rv.begin(), rv.end());
    }
    return StatisticsMatrix(std::move(ids), std::move(labels), columns_, std::move(values));
  }

  friend bool operator==(const StatisticsMatrix&, const StatisticsMatrix&) = default;

 private:
  void validate() const {
    if (labels_.size() != sample_ids_.size()) {
      throw Error(ErrorCode::kLengthMismatch, "labels and sample_ids differ in length");
    }
    if (values_.size() != sample_ids_.size() * columns_.size()) {
      throw Error(ErrorCode::kLengthMismatch, "value count does not equal rows x columns");
    }
    std::unordered_set<std::string> keys;
    for (const auto& c : columns_) {
      if (!keys.insert(c.key()).second) {
        throw Error(ErrorCode::kDuplicateColumn, "duplicate column '" + c.key() + "'");
      }
    }
    std::unordered_set<std::string_view> ids;
    for (const auto& id : sample_ids_) {
      if (!ids.insert(id).second) {
        throw Error(ErrorCode::kDuplicateSampleId, "duplicate sample_id '" + id + "'");
      }
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        const std::size_t r = i / columns_.size();
        const std::size_t c = i % columns_.size();
        throw Error(ErrorCode::kNonFiniteValue, "row " + std::to_string(r) + " (" +
                                                    sample_ids_[r] + "), column " +
                                                    columns_[c].key());
      }
    }
  }

  std::vector<std::string> sample_ids_;
  std::vector<Label> labels_;
  std::vector<StatisticId> columns_;
  std::vector<double> values_;
};

enum class MatrixFormat { kCsv, kBinary };

inline constexpr char kMatrixMagic[8] = {'N', 'S', 'T', 'A', 'T', 'M', 'A', 'T'};
inline constexpr std::uint32_t kMatrixFormatVersion = 1;

/// `.bin`/`.nsm` select the binary format; anything else is CSV.
inline MatrixFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".bin" || ext == ".nsm") ? MatrixFormat::kBinary : MatrixFormat::kCsv;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

// Returns nullopt for cells that are syntactically numbers but not finite.
inline std::optional<double> parse_double_cell(std::string_view cell, std::size_t line_no) {
  double v = 0.0;
  const char* first = cell.data();
  if (!cell.empty() && cell.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    throw Error(ErrorCode::kParseError,
                "line " + std::to_string(line_no) + ": bad number '" + std::string(cell) + "'");
  }
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace detail

inline std::string encode_csv(const StatisticsMatrix& m) {
  std::string out = "sample_id,label";
  for (const auto& c : m.columns()) out += "," + c.key();
  out += "\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out += m.sample_ids()[r];
    out += ",";
    out += to_string(m.labels()[r]);
    for (double v : m.row(r)) {
      out += ",";
      out += detail::format_double(v);
    }
    out += "\n";
  }
  return out;
}

inline StatisticsMatrix decode_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw Error(ErrorCode::kParseError, "missing header");

  const auto header = detail::split_csv_line(lines[0]);
  if (header.size() < 2 || header[0] != "sample_id" || header[1] != "label") {
    throw Error(ErrorCode::kParseError, "header must start with 'sample_id,label'");
  }
  std::vector<StatisticId> columns;
  for (std::size_t i = 2; i < header.size(); ++i) {
    if (header[i].empty()) throw Error(ErrorCode::kParseError, "empty column name in header");
    columns.push_back(StatisticId::parse(header[i]));
  }
  std::unordered_set<std::string> keys;
  for (const auto& c : columns) {
    if (!keys.insert(c.key()).second) {
      throw Error(ErrorCode::kDuplicateColumn, "duplicate column '" + c.key() + "'");
    }
  }

  const std::size_t t = columns.size();
  std::vector<std::string> ids;
  std::vector<Label> labels;
  std::vector<double> values;
  values.reserve((lines.size() - 1) * t);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto cells = detail::split_csv_line(lines[li]);
    if (cells.size() != t + 2) {
      throw Error(ErrorCode::kParseError, "line " + std::to_string(li + 1) + ": expected " +
                                              std::to_string(t + 2) + " cells, got " +
                                              std::to_string(cells.size()));
    }
    if (cells[0].empty()) {
      throw Error(ErrorCode::kParseError, "line " + std::to_string(li + 1) + ": empty sample_id");
    }
    ids.emplace_back(cells[0]);
    labels.push_back(parse_label(cells[1]));
    for (std::size_t c = 0; c < t; ++c) {
      auto v = detail::parse_double_cell(cells[c + 2], li + 1);
      if (!v) {
        throw Error(ErrorCode::kNonFiniteValue, "row " + std::to_string(li - 1) + " (" +
                                                    std::string(cells[0]) + "), column " +
                                                    columns[c].key());
      }
      values.push_back(*v);
    }
  }
  return StatisticsMatrix(std::move(ids), std::move(labels), std::move(columns),
                          std::move(values));
}

/// Binary layout: magic, u32 version, u64 rows, u64 cols, column table
/// (extractor, tag, display name as length-prefixed strings), per-row
/// (sample_id, u8 label), then row-major f64 values. Little-endian.
inline std::string encode_binary(const StatisticsMatrix& m) {
  detail::ByteWriter w;
  w.bytes(kMatrixMagic, sizeof kMatrixMagic);
  w.u32(kMatrixFormatVersion);
  w.u64(m.rows());
  w.u64(m.cols());
  for (const auto& c : m.columns()) {
    w.str(c.extractor_name);
    w.str(c.parameter_tag);
    w.str(c.display_name);
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    w.str(m.sample_ids()[r]);
    w.u8(static_cast<std::uint8_t>(m.labels()[r]));
  }
  w.bytes(m.values().data(), m.values().size() * sizeof(double));
  return std::move(w).take();
}

inline StatisticsMatrix decode_binary(std::string_view data) {
  detail::ByteReader r(data);
  char magic[sizeof kMatrixMagic];
  r.bytes(magic, sizeof magic);
  if (!std::equal(magic, magic + sizeof magic, kMatrixMagic)) {
    throw Error(ErrorCode::kParseError, "not a binary statistics matrix (bad magic)");
  }
  const auto version = r.u32();
  if (version != kMatrixFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "unsupported matrix format version " + std::to_string(version));
  }
  const auto n = r.u64();
  const auto t = r.u64();
  if (t > r.remaining() || n > r.remaining()) {
    throw Error(ErrorCode::kParseError, "matrix dimensions exceed file size");
  }
  std::vector<StatisticId> columns(t);
  for (auto& c : columns) {
    c.extractor_name = r.str();
    c.parameter_tag = r.str();
    c.display_name = r.str();
  }
  std::vector<std::string> ids(n);
  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = r.str();
    const auto l = r.u8();
    if (l > 2) throw Error(ErrorCode::kParseError, "bad label byte");
    labels[i] = static_cast<Label>(l);
  }
  if (r.remaining() != n * t * sizeof(double)) {
    throw Error(ErrorCode::kParseError, "value block size mismatch");
  }
  std::vector<double> values(n * t);
  if (!values.empty()) r.bytes(values.data(), values.size() * sizeof(double));
  return StatisticsMatrix(std::move(ids), std::move(labels), std::move(columns),
                          std::move(values));
}

inline StatisticsMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format) {
  const std::string data = detail::read_file(path);
  return format == MatrixFormat::kCsv ? decode_csv(data) : decode_binary(data);
}

inline StatisticsMatrix load_matrix(const std::filesystem::path& path) {
  return load_matrix(path, format_from_path(path));
}

inline void save_matrix(const StatisticsMatrix& m, const std::filesystem::path& path,
                        MatrixFormat format) {
  detail::write_file(path, format == MatrixFormat::kCsv ? encode_csv(m) : encode_binary(m));
}

inline void save_matrix(const StatisticsMatrix& m, const std::filesystem::path& path) {
  save_matrix(m, path, format_from_path(path));
}

struct SplitSpec {
  double calibration_fraction = 0.3;
  std::uint64_t seed = 0;
  /// When set, eligible rows are split into quintiles of this column and the
  /// fraction is drawn from each quintile separately.
  std::optional<std::string> stratify_by;
};

struct MatrixSplit {
  StatisticsMatrix calibration;
  StatisticsMatrix evaluation;
};

/// Partitions rows into calibration and evaluation sets. Only REAL rows are
/// eligible for calibration (every row when the matrix is unlabeled); FAKE
/// rows always go to evaluation. Both halves keep the original row order.
inline MatrixSplit split(const StatisticsMatrix& m, const SplitSpec& spec) {
  if (!(spec.calibration_fraction > 0.0 && spec.calibration_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "calibration_fraction must be in (0, 1)");
  }
  const bool labeled = m.has_labels();
  std::vector<std::size_t> eligible;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (!labeled || m.labels()[r] == Label::kReal) eligible.push_back(r);
  }

  std::vector<std::vector<std::size_t>> strata;
  if (spec.stratify_by) {
    const auto col = m.find_column(StatisticId::parse(*spec.stratify_by));
    if (!col) throw Error(ErrorCode::kMissingColumn, "stratify column '" + *spec.stratify_by + "'");
    std::stable_sort(eligible.begin(), eligible.end(), [&](std::size_t a, std::size_t b) {
      return m.at(a, *col) < m.at(b, *col);
    });
    constexpr std::size_t kStrata = 5;
    strata.resize(kStrata);
    for (std::size_t i = 0; i < eligible.size(); ++i) {
      strata[i * kStrata / eligible.size()].push_back(eligible[i]);
    }
  } else {
    strata.push_back(eligible);
  }

  auto engine = detail::make_engine(spec.seed);
  std::vector<char> in_calibration(m.rows(), 0);
  std::size_t n_calibration = 0;
  for (const auto& stratum : strata) {
    const auto take = static_cast<std::size_t>(
        std::llround(spec.calibration_fraction * static_cast<double>(stratum.size())));
    for (std::size_t i : detail::sample_without_replacement(stratum.size(), take, engine)) {
      in_calibration[stratum[i]] = 1;
      ++n_calibration;
    }
  }
  if (n_calibration == 0) {
    throw Error(ErrorCode::kEmptyCalibrationSet, "no rows selected for calibration");
  }

  std::vector<std::size_t> cal, eval;
  for (std::size_t r = 0; r < m.rows(); ++r) (in_calibration[r] ? cal : eval).push_back(r);
  return {m.select_rows(cal), m.select_rows(eval)};
}

}  // namespace nullstat
