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

#include "lungbeam/classes.hpp"

#include <algorithm>
#include <cctype>

#include "lungbeam/error.hpp"

namespace lungbeam {
namespace {

std::string squash(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

int class_count(ClassScheme scheme) { return scheme == ClassScheme::Ternary ? 3 : 2; }

const std::vector<std::string>& class_names(ClassScheme scheme) {
  static const std::vector<std::string> ternary{"COVID19", "CAP", "Normal"};
  static const std::vector<std::string> binary{"COVID19", "NonCOVID"};
  return scheme == ClassScheme::Ternary ? ternary : binary;
}

const std::vector<std::string>& class_keys(ClassScheme scheme) {
  static const std::vector<std::string> ternary{"covid19", "cap", "normal"};
  static const std::vector<std::string> binary{"covid19", "noncovid"};
  return scheme == ClassScheme::Ternary ? ternary : binary;
}

std::optional<int> try_parse_class(ClassScheme scheme, std::string_view text) {
  const std::string s = squash(text);
  if (s == "covid19" || s == "covid") return 0;
  if (scheme == ClassScheme::Ternary) {
    if (s == "cap" || s == "pneumonia") return 1;
    if (s == "normal") return 2;
  } else {
    if (s == "noncovid" || s == "noncovid19") return 1;
  }
  return std::nullopt;
}

int parse_class(ClassScheme scheme, std::string_view text) {
  if (auto c = try_parse_class(scheme, text)) return *c;
  fail(ErrorCode::UnknownClass, "'" + std::string(text) + "' is not a " +
                                    (scheme == ClassScheme::Ternary ? "ternary" : "binary") + " class");
}

}  // namespace lungbeam
