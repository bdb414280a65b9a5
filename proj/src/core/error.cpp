// Copyright 2026 The sgmreid Authors
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

#include "core/error.hpp"

namespace reid {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kCorruptFile: return "CorruptFile";
    case ErrorCode::kDimensionOverflow: return "DimensionOverflow";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyPixelSet: return "EmptyPixelSet";
    case ErrorCode::kStackTooSmall: return "StackTooSmall";
    case ErrorCode::kEmptyStripe: return "EmptyStripe";
    case ErrorCode::kSourceMismatch: return "SourceMismatch";
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kRankTooLarge: return "RankTooLarge";
    case ErrorCode::kTooFewPairs: return "TooFewPairs";
    case ErrorCode::kTooFewIdentities: return "TooFewIdentities";
    case ErrorCode::kProtocolViolation: return "ProtocolViolation";
    case ErrorCode::kArtifactMismatch: return "ArtifactMismatch";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kNumericFailure: return "NumericFailure";
  }
  return "Unknown";
}

}  // namespace reid
