// Copyright 2026 The Lungbeam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lungbeam/error.hpp"

namespace lungbeam {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::UnsupportedDatatype: return "UnsupportedDatatype";
    case ErrorCode::TruncatedData: return "TruncatedData";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::DegenerateVolume: return "DegenerateVolume";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidVolume: return "InvalidVolume";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::NonMonotonicPoints: return "NonMonotonicPoints";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::NonDivisible: return "NonDivisible";
    case ErrorCode::SagittalRequested: return "SagittalRequested";
    case ErrorCode::NonIsotropicVolume: return "NonIsotropicVolume";
    case ErrorCode::ValueOutOfRange: return "ValueOutOfRange";
    case ErrorCode::ParamsOutOfRange: return "ParamsOutOfRange";
    case ErrorCode::DuplicatePatient: return "DuplicatePatient";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::MalformedScores: return "MalformedScores";
    case ErrorCode::IncompleteBatch: return "IncompleteBatch";
    case ErrorCode::MixedPatients: return "MixedPatients";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DegenerateKappa: return "DegenerateKappa";
    case ErrorCode::SingleClassInput: return "SingleClassInput";
    case ErrorCode::Usage: return "Usage";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage:
    case ErrorCode::SagittalRequested:
    case ErrorCode::NonDivisible:
    case ErrorCode::ParamsOutOfRange:
    case ErrorCode::UnknownPreset:
      return 2;
    case ErrorCode::MalformedHeader:
    case ErrorCode::UnsupportedDatatype:
    case ErrorCode::TruncatedData:
    case ErrorCode::SchemaViolation:
    case ErrorCode::NonMonotonicPoints:
    case ErrorCode::MalformedCsv:
    case ErrorCode::MalformedScores:
    case ErrorCode::UnknownClass:
    case ErrorCode::DuplicatePatient:
    case ErrorCode::ValueOutOfRange:
    case ErrorCode::InvalidVolume:
      return 3;
    case ErrorCode::IoFailure:
      return 5;
    case ErrorCode::DegenerateVolume:
    case ErrorCode::EmptyMask:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::NonIsotropicVolume:
    case ErrorCode::IncompleteBatch:
    case ErrorCode::MixedPatients:
    case ErrorCode::LengthMismatch:
    case ErrorCode::EmptyInput:
    case ErrorCode::DegenerateKappa:
    case ErrorCode::SingleClassInput:
      return 4;
  }
  return 1;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      detail_(message) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace lungbeam
