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

#pragma once

#include <stdexcept>
#include <string>

namespace reid {

/// Failure categories shared by every module. The C API maps these 1:1 onto
/// its status codes, so the numbering is part of the ABI.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kUnsupportedFormat = 2,
  kCorruptFile = 3,
  kDimensionOverflow = 4,
  kDimensionMismatch = 5,
  kEmptyPixelSet = 6,
  kStackTooSmall = 7,
  kEmptyStripe = 8,
  kSourceMismatch = 9,
  kNotPositiveDefinite = 10,
  kRankTooLarge = 11,
  kTooFewPairs = 12,
  kTooFewIdentities = 13,
  kProtocolViolation = 14,
  kArtifactMismatch = 15,
  kIoFailure = 16,
  kNumericFailure = 17,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace reid
