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

#include "lungbeam/csv.hpp"

#include <charconv>
#include <cmath>

#include "lungbeam/error.hpp"
#include "lungbeam/nifti.hpp"

namespace lungbeam::csv {
namespace {

[[noreturn]] void malformed(const std::string& source, int line, const std::string& what) {
  fail(ErrorCode::MalformedCsv, source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

int Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

int Table::require(std::string_view name, const std::string& source) const {
  const int c = column(name);
  if (c < 0) malformed(source, 1, "missing column '" + std::string(name) + "'");
  return c;
}

Table parse(std::string_view text, const std::string& source) {
  Table table;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  int line = 1;
  int row_line = 1;

  auto end_row = [&] {
    fields.push_back(std::move(field));
    field.clear();
    const bool blank = fields.size() == 1 && fields[0].empty() && !field_started;
    if (!blank) {
      if (table.header.empty()) {
        table.header = std::move(fields);
      } else {
        if (fields.size() != table.header.size())
          malformed(source, row_line,
                    "expected " + std::to_string(table.header.size()) + " fields, got " +
                        std::to_string(fields.size()));
        table.rows.push_back({row_line, std::move(fields)});
      }
    }
    fields.clear();
    field_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) malformed(source, line, "quote inside unquoted field");
        quoted = true;
        field_started = true;
        break;
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        ++line;
        row_line = line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (quoted) malformed(source, line, "unterminated quoted field");
  if (field_started || !field.empty() || !fields.empty()) end_row();
  if (table.header.empty()) malformed(source, 1, "missing header row");
  return table;
}

Table read(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), path.string());
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  return out;
}

double parse_double(const std::string& text, const std::string& where) {
  double value = 0.0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value))
    fail(ErrorCode::MalformedCsv, where + ": expected a number, got '" + text + "'");
  return value;
}

long parse_int(const std::string& text, const std::string& where) {
  long value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    fail(ErrorCode::MalformedCsv, where + ": expected an integer, got '" + text + "'");
  return value;
}

}  // namespace lungbeam::csv
