/*
 * Copyright 2026 The skullfx Authors.
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

namespace skullfx {

enum class ErrorCode {
  // dicom
  kTruncatedFile,
  kUnsupportedTransferSyntax,
  kMissingMagic,
  kMissingRequiredTag,
  kPixelDataSizeMismatch,
  kMalformedValue,
  kEmptySeries,
  // preprocess
  kImageTooSmall,
  kEmptyMask,
  // dataset
  kUnknownClassName,
  kDuplicateSampleRef,
  kMalformedRow,
  kTooFewPatients,
  kEmptyClass,
  // features
  kShapeMismatch,
  kBackendUnavailable,
  kBadMagic,
  kDimensionHeaderMismatch,
  kTruncatedStore,
  // classifiers
  kDegenerateLabels,
  kDimensionMismatch,
  // metrics
  kLabelOutOfRange,
  kEmptyMatrix,
  kZeroSupportClass,
  kSingleClassColumn,
  kDegenerateAgreement,
  kBadProbabilityRow,
  // pipeline
  kConfig,
  kMismatchedTestSets,
  kIo,
};

constexpr std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kUnsupportedTransferSyntax: return "UnsupportedTransferSyntax";
    case ErrorCode::kMissingMagic: return "MissingMagic";
    case ErrorCode::kMissingRequiredTag: return "MissingRequiredTag";
    case ErrorCode::kPixelDataSizeMismatch: return "PixelDataSizeMismatch";
    case ErrorCode::kMalformedValue: return "MalformedValue";
    case ErrorCode::kEmptySeries: return "EmptySeries";
    case ErrorCode::kImageTooSmall: return "ImageTooSmall";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kUnknownClassName: return "UnknownClassName";
    case ErrorCode::kDuplicateSampleRef: return "DuplicateSampleRef";
    case ErrorCode::kMalformedRow: return "MalformedRow";
    case ErrorCode::kTooFewPatients: return "TooFewPatients";
    case ErrorCode::kEmptyClass: return "EmptyClass";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kDimensionHeaderMismatch: return "DimensionHeaderMismatch";
    case ErrorCode::kTruncatedStore: return "TruncatedStore";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::kEmptyMatrix: return "EmptyMatrix";
    case ErrorCode::kZeroSupportClass: return "ZeroSupportClass";
    case ErrorCode::kSingleClassColumn: return "SingleClassColumn";
    case ErrorCode::kDegenerateAgreement: return "DegenerateAgreement";
    case ErrorCode::kBadProbabilityRow: return "BadProbabilityRow";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kMismatchedTestSets: return "MismatchedTestSets";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

// All library failures are reported through this exception type; `code()`
// identifies the failure and `what()` carries human context.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(ErrorCodeName(code)) +
                           (detail.empty() ? "" : ": " + detail)),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& detail = {}) {
  throw Error(code, detail);
}

}  // namespace skullfx
