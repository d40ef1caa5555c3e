// Copyright 2026 The explgraph Authors.
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

namespace explgraph {

enum class ErrorCode {
  kSyntax,
  kRange,
  kLookup,
  kInvalidArgument,
  kCyclicGraph,
  kDanglingReference,
  kUndeclaredValue,
  kEmptyDefinition,
  kExplosionLimit,
  kMissingParameter,
  kAllZero,
  kZeroEvidence,
  kUnparseable,
  kInconsistentExplanation,
  kLengthMismatch,
  kVanishingAcceptance,
  kInvalidRow,
  kNoPath,
  kInvalidGrammar,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSyntax: return "SyntaxError";
    case ErrorCode::kRange: return "RangeError";
    case ErrorCode::kLookup: return "LookupError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kCyclicGraph: return "CyclicGraph";
    case ErrorCode::kDanglingReference: return "DanglingReference";
    case ErrorCode::kUndeclaredValue: return "UndeclaredValue";
    case ErrorCode::kEmptyDefinition: return "EmptyDefinition";
    case ErrorCode::kExplosionLimit: return "ExplosionLimit";
    case ErrorCode::kMissingParameter: return "MissingParameter";
    case ErrorCode::kAllZero: return "AllZero";
    case ErrorCode::kZeroEvidence: return "ZeroEvidence";
    case ErrorCode::kUnparseable: return "Unparseable";
    case ErrorCode::kInconsistentExplanation: return "InconsistentExplanation";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kVanishingAcceptance: return "VanishingAcceptance";
    case ErrorCode::kInvalidRow: return "InvalidRow";
    case ErrorCode::kNoPath: return "NoPath";
    case ErrorCode::kInvalidGrammar: return "InvalidGrammar";
  }
  return "Error";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace explgraph
