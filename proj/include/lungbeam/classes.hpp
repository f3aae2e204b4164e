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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lungbeam {

// Ternary: COVID19, CAP, Normal. Binary: COVID19, NonCOVID. A class is its
// index in this canonical order, which also breaks ties.
enum class ClassScheme { Ternary, Binary };

int class_count(ClassScheme scheme);
// Display names ("COVID19", "CAP", "Normal", "NonCOVID").
const std::vector<std::string>& class_names(ClassScheme scheme);
// CSV column suffixes ("covid19", "cap", "normal", "noncovid").
const std::vector<std::string>& class_keys(ClassScheme scheme);

// Case-insensitive; accepts the display name, the key and common spellings
// such as "COVID-19" or "non-covid". Throws UnknownClass.
int parse_class(ClassScheme scheme, std::string_view text);
std::optional<int> try_parse_class(ClassScheme scheme, std::string_view text);

}  // namespace lungbeam
