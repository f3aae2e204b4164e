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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lungbeam {

enum class ErrorCode {
  // volume-io
  MalformedHeader,
  UnsupportedDatatype,
  TruncatedData,
  IoFailure,
  // preprocess
  DegenerateVolume,
  EmptyMask,
  ShapeMismatch,
  InvalidVolume,
  // transfer-function
  SchemaViolation,
  NonMonotonicPoints,
  UnknownPreset,
  // camera
  NonDivisible,
  SagittalRequested,
  // renderer
  NonIsotropicVolume,
  ValueOutOfRange,
  // dataset
  ParamsOutOfRange,
  DuplicatePatient,
  MalformedCsv,
  // consensus
  MalformedScores,
  IncompleteBatch,
  MixedPatients,
  // metrics
  LengthMismatch,
  UnknownClass,
  EmptyInput,
  DegenerateKappa,
  SingleClassInput,
  // cli
  Usage,
};

std::string_view to_string(ErrorCode code);

// Process exit status for a failure of the given kind:
// 2 usage, 3 input format, 4 pipeline precondition, 5 I/O.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  // Message without the error-kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace lungbeam
