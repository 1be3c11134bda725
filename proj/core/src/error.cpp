// Copyright 2026 The Canvas Authors.
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

#include "canvas/error.hpp"

namespace canvas {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDynVarInDenominator: return "DynVarInDenominator";
    case ErrorCode::kTooManyDynVars: return "TooManyDynVars";
    case ErrorCode::kIllegalSubstitution: return "IllegalSubstitution";
    case ErrorCode::kNonIntegral: return "NonIntegral";
    case ErrorCode::kUnbound: return "Unbound";
    case ErrorCode::kNotApplicable: return "NotApplicable";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNotFinalizable: return "NotFinalizable";
    case ErrorCode::kExhausted: return "Exhausted";
    case ErrorCode::kNotReplaceable: return "NotReplaceable";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kProtocol: return "Protocol";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace canvas
