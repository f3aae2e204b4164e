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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace lungbeam::csv {

struct Row {
  int line = 0;  // 1-based line number in the source
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  // Column index by name, or -1.
  int column(std::string_view name) const;
  // Throws MalformedCsv naming the missing column.
  int require(std::string_view name, const std::string& source) const;
};

// Minimal RFC 4180: comma separator, double-quoted fields with "" escapes,
// CR/LF tolerant, blank lines skipped. Every row must match the header width.
Table parse(std::string_view text, const std::string& source = "<csv>");
Table read(const std::filesystem::path& path);

// Quotes a field only when it contains a comma, quote or newline.
std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

double parse_double(const std::string& text, const std::string& where);
long parse_int(const std::string& text, const std::string& where);

}  // namespace lungbeam::csv
