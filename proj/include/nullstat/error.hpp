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

#include <stdexcept>
#include <string>
#include <string_view>

namespace nullstat {

// Stable identifiers; the CLI prints these names in its error records.
enum class ErrorCode {
  kInvalidArgument,
  kIoError,
  kParseError,
  kNonFiniteValue,
  kDuplicateColumn,
  kDuplicateSampleId,
  kEmptyCalibrationSet,
  kEmptyReference,
  kDegenerateAllEqual,
  kNonFiniteInput,
  kMissingColumn,
  kDegenerateColumn,
  kLengthMismatch,
  kEmptyInput,
  kOutOfRangePValue,
  kTooFewSamples,
  kPreconditionViolated,
  kVersionMismatch,
  kDigestMismatch,
  kSingleClassInput,
  kNoPositives,
  kInsufficientSamples,
  kInvalidSpec,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kDuplicateColumn: return "DuplicateColumn";
    case ErrorCode::kDuplicateSampleId: return "DuplicateSampleId";
    case ErrorCode::kEmptyCalibrationSet: return "EmptyCalibrationSet";
    case ErrorCode::kEmptyReference: return "EmptyReference";
    case ErrorCode::kDegenerateAllEqual: return "DegenerateAllEqual";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kDegenerateColumn: return "DegenerateColumn";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kOutOfRangePValue: return "OutOfRangePValue";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kPreconditionViolated: return "PreconditionViolated";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kDigestMismatch: return "DigestMismatch";
    case ErrorCode::kSingleClassInput: return "SingleClassInput";
    case ErrorCode::kNoPositives: return "NoPositives";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
  }
  return "Unknown";
}

/// Exception type thrown by every nullstat operation.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nullstat
