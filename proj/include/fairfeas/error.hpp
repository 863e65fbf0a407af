// Copyright 2026 The fairfeas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairfeas {

enum class ErrorCode {
  kEmptyCounts,
  kKOutOfRange,
  kNotSorted,
  kTooFewGroups,
  kDomainError,
  kZeroEpsP,
  kSingularDenominator,
  kBadPrevalence,
  kMismatchedSets,
  kOverlappingBins,
  kBadSampleStep,
  kBadGrid,
  kMissingColumn,
  kMissingValue,
  kEmptyFile,
  kBadSchema,
  kBadCsv,
  kEmptyGroup,
  kBadGrouping,
  kTargetTooLarge,
  kInfeasible,
  kTooManyGroups,
  kIoError,
};

constexpr std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyCounts: return "EmptyCounts";
    case ErrorCode::kKOutOfRange: return "KOutOfRange";
    case ErrorCode::kNotSorted: return "NotSorted";
    case ErrorCode::kTooFewGroups: return "TooFewGroups";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kZeroEpsP: return "ZeroEpsP";
    case ErrorCode::kSingularDenominator: return "SingularDenominator";
    case ErrorCode::kBadPrevalence: return "BadPrevalence";
    case ErrorCode::kMismatchedSets: return "MismatchedSets";
    case ErrorCode::kOverlappingBins: return "OverlappingBins";
    case ErrorCode::kBadSampleStep: return "BadSampleStep";
    case ErrorCode::kBadGrid: return "BadGrid";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kMissingValue: return "MissingValue";
    case ErrorCode::kEmptyFile: return "EmptyFile";
    case ErrorCode::kBadSchema: return "BadSchema";
    case ErrorCode::kBadCsv: return "BadCsv";
    case ErrorCode::kEmptyGroup: return "EmptyGroup";
    case ErrorCode::kBadGrouping: return "BadGrouping";
    case ErrorCode::kTargetTooLarge: return "TargetTooLarge";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kTooManyGroups: return "TooManyGroups";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

// All library failures surface as Error; what() is prefixed with the code
// name so command-line users see e.g. "ZeroEpsP: ...".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_name(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// MissingValue carries the 0-based data row where the blank cell was found.
class MissingValueError : public Error {
 public:
  MissingValueError(std::size_t row, const std::string& column)
      : Error(ErrorCode::kMissingValue,
              "row " + std::to_string(row) + ", column '" + column + "'"),
        row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace fairfeas
