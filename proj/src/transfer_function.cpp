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

#include "lungbeam/transfer_function.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <json.hpp>

#include "lungbeam/error.hpp"
#include "lungbeam/nifti.hpp"

#ifndef LUNGBEAM_DEFAULT_PRESET_DIR
#define LUNGBEAM_DEFAULT_PRESET_DIR "presets"
#endif

namespace lungbeam {
namespace {

using nlohmann::json;

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  fail(ErrorCode::SchemaViolation, path + ": " + what);
}

double number_at(const json& arr, std::size_t i, const std::string& path) {
  const json& v = arr.at(i);
  if (!v.is_number()) schema_error(path + "/" + std::to_string(i), "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema_error(path + "/" + std::to_string(i), "not finite");
  return d;
}

template <typename Point>
std::size_t locate(const std::vector<Point>& pts, double hu) {
  // Index of the segment [i, i+1] containing hu; caller guarantees the hull.
  auto it = std::upper_bound(pts.begin(), pts.end(), hu,
                             [](double h, const Point& p) { return h < p.hu; });
  std::size_t i = static_cast<std::size_t>(it - pts.begin());
  return i == 0 ? 0 : std::min(i - 1, pts.size() - 2);
}

}  // namespace

void TransferFunction::validate() const {
  if (!(reference_step_mm > 0.0) || !std::isfinite(reference_step_mm))
    schema_error("/reference_step_mm", "must be a positive number");
  if (color_points.size() < 2) schema_error("/color", "needs at least 2 points");
  if (opacity_points.size() < 2) schema_error("/opacity", "needs at least 2 points");
  for (std::size_t i = 0; i < color_points.size(); ++i) {
    const auto& p = color_points[i];
    const std::string path = "/color/" + std::to_string(i);
    if (!std::isfinite(p.hu)) schema_error(path + "/0", "hu not finite");
    if (!in_unit(p.r)) schema_error(path + "/1", "red outside [0,1]");
    if (!in_unit(p.g)) schema_error(path + "/2", "green outside [0,1]");
    if (!in_unit(p.b)) schema_error(path + "/3", "blue outside [0,1]");
    if (i > 0 && !(p.hu > color_points[i - 1].hu))
      fail(ErrorCode::NonMonotonicPoints, path + "/0: hu not strictly increasing");
  }
  for (std::size_t i = 0; i < opacity_points.size(); ++i) {
    const auto& p = opacity_points[i];
    const std::string path = "/opacity/" + std::to_string(i);
    if (!std::isfinite(p.hu)) schema_error(path + "/0", "hu not finite");
    if (!in_unit(p.alpha)) schema_error(path + "/1", "alpha outside [0,1]");
    if (i > 0 && !(p.hu > opacity_points[i - 1].hu))
      fail(ErrorCode::NonMonotonicPoints, path + "/0: hu not strictly increasing");
  }
}

std::array<double, 3> TransferFunction::color(double hu) const {
  const auto& pts = color_points;
  if (hu <= pts.front().hu) return {pts.front().r, pts.front().g, pts.front().b};
  if (hu >= pts.back().hu) return {pts.back().r, pts.back().g, pts.back().b};
  const std::size_t i = locate(pts, hu);
  const auto& a = pts[i];
  const auto& b = pts[i + 1];
  if (hu == a.hu) return {a.r, a.g, a.b};
  const double t = (hu - a.hu) / (b.hu - a.hu);
  return {a.r + t * (b.r - a.r), a.g + t * (b.g - a.g), a.b + t * (b.b - a.b)};
}

double TransferFunction::opacity(double hu) const {
  const auto& pts = opacity_points;
  if (hu < pts.front().hu || hu > pts.back().hu) return 0.0;
  if (hu == pts.back().hu) return pts.back().alpha;
  const std::size_t i = locate(pts, hu);
  const auto& a = pts[i];
  const auto& b = pts[i + 1];
  if (hu == a.hu) return a.alpha;
  const double t = (hu - a.hu) / (b.hu - a.hu);
  return a.alpha + t * (b.alpha - a.alpha);
}

Rgba TransferFunction::evaluate(double hu) const {
  const auto c = color(hu);
  return {c[0], c[1], c[2], opacity(hu)};
}

double opacity_correct(double alpha, double step_mm, double reference_step_mm) {
  if (alpha <= 0.0) return 0.0;
  if (alpha >= 1.0) return 1.0;
  if (step_mm == reference_step_mm) return alpha;
  return 1.0 - std::pow(1.0 - alpha, step_mm / reference_step_mm);
}

TransferFunction load_tf(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    schema_error("", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) schema_error("", "expected an object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "name" && key != "reference_step_mm" && key != "color" && key != "opacity")
      schema_error("/" + key, "unknown field");
  }

  TransferFunction tf;
  if (!doc.contains("name") || !doc["name"].is_string()) schema_error("/name", "expected a string");
  tf.name = doc["name"].get<std::string>();
  if (doc.contains("reference_step_mm")) {
    if (!doc["reference_step_mm"].is_number()) schema_error("/reference_step_mm", "expected a number");
    tf.reference_step_mm = doc["reference_step_mm"].get<double>();
  }

  if (!doc.contains("color") || !doc["color"].is_array()) schema_error("/color", "expected an array");
  const json& color = doc["color"];
  for (std::size_t i = 0; i < color.size(); ++i) {
    const std::string path = "/color/" + std::to_string(i);
    const json& p = color[i];
    if (!p.is_array() || p.size() != 4) schema_error(path, "expected [hu, r, g, b]");
    tf.color_points.push_back(
        {number_at(p, 0, path), number_at(p, 1, path), number_at(p, 2, path), number_at(p, 3, path)});
  }

  if (!doc.contains("opacity") || !doc["opacity"].is_array())
    schema_error("/opacity", "expected an array");
  const json& opacity = doc["opacity"];
  for (std::size_t i = 0; i < opacity.size(); ++i) {
    const std::string path = "/opacity/" + std::to_string(i);
    const json& p = opacity[i];
    if (!p.is_array() || p.size() != 2) schema_error(path, "expected [hu, alpha]");
    tf.opacity_points.push_back({number_at(p, 0, path), number_at(p, 1, path)});
  }

  tf.validate();
  return tf;
}

std::string serialize_tf(const TransferFunction& tf) {
  tf.validate();
  json color = json::array();
  for (const auto& p : tf.color_points) color.push_back({p.hu, p.r, p.g, p.b});
  json opacity = json::array();
  for (const auto& p : tf.opacity_points) opacity.push_back({p.hu, p.alpha});
  json doc;
  doc["name"] = tf.name;
  doc["reference_step_mm"] = tf.reference_step_mm;
  doc["color"] = std::move(color);
  doc["opacity"] = std::move(opacity);
  return doc.dump(2) + "\n";
}

TransferFunction load_tf_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return load_tf(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void save_tf_file(const TransferFunction& tf, const std::filesystem::path& path) {
  const std::string text = serialize_tf(tf);
  write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::string preset_name(Preset id) {
  return "TF" + std::to_string(static_cast<int>(id) + 1);
}

std::optional<Preset> parse_preset(std::string_view name) {
  if (name.size() != 3) return std::nullopt;
  if (std::toupper(static_cast<unsigned char>(name[0])) != 'T' ||
      std::toupper(static_cast<unsigned char>(name[1])) != 'F')
    return std::nullopt;
  const int n = name[2] - '0';
  if (n < 1 || n > 6) return std::nullopt;
  return static_cast<Preset>(n - 1);
}

TransferFunction builtin_preset(Preset id) {
  TransferFunction tf;
  tf.name = preset_name(id);
  switch (id) {
    case Preset::TF1:
      // Opaque shell where interpolated HU crosses from masked air into the
      // parenchyma; the parenchyma itself stays transparent.
      tf.color_points = {{-1000, 0.80, 0.50, 0.42}, {-950, 0.92, 0.68, 0.58}, {-850, 1.00, 0.86, 0.80}};
      tf.opacity_points = {{-1010, 0.0}, {-980, 0.6}, {-940, 0.6}, {-910, 0.0}};
      break;
    case Preset::TF2:
      // Only [-700, -300] is mapped; both end points carry opacity so the
      // support is the closed interval.
      tf.color_points = {{-700, 0.85, 0.25, 0.10}, {-500, 1.00, 0.60, 0.20}, {-300, 1.00, 0.90, 0.55}};
      tf.opacity_points = {{-700, 0.02}, {-500, 0.08}, {-300, 0.15}};
      break;
    case Preset::TF3:
      // Gray-scale brightness ramp.
      tf.color_points = {{-750, 0.20, 0.20, 0.20}, {-200, 1.00, 1.00, 1.00}};
      tf.opacity_points = {{-750, 0.0}, {-450, 0.03}, {-200, 0.12}};
      break;
    case Preset::TF4:
      tf.color_points = {{-950, 0.20, 0.40, 0.90}, {-750, 0.30, 0.70, 0.90},
                         {-500, 0.95, 0.85, 0.30}, {-100, 1.00, 1.00, 1.00}};
      tf.opacity_points = {{-1010, 0.0}, {-970, 0.12}, {-940, 0.0}, {-600, 0.01},
                           {-300, 0.05}, {0, 0.30}, {100, 0.40}, {300, 0.0}};
      break;
    case Preset::TF5:
      tf.color_points = {{-900, 0.10, 0.30, 0.80}, {-700, 0.10, 0.80, 0.30}, {-500, 1.00, 0.80, 0.00},
                         {-300, 1.00, 0.30, 0.00}, {0, 1.00, 1.00, 1.00}};
      tf.opacity_points = {{-1000, 0.0}, {-900, 0.003}, {-750, 0.006}, {-700, 0.04},
                           {-400, 0.12}, {-100, 0.20}, {100, 0.30}, {300, 0.0}};
      break;
    case Preset::TF6:
      // Blue parenchyma, amber-to-red ground-glass band, white dense tissue.
      tf.color_points = {{-1000, 0.15, 0.35, 0.75}, {-800, 0.25, 0.55, 0.90}, {-700, 0.90, 0.75, 0.20},
                         {-450, 1.00, 0.45, 0.10}, {-300, 0.90, 0.15, 0.10}, {100, 1.00, 0.95, 0.90}};
      tf.opacity_points = {{-1000, 0.0}, {-950, 0.002}, {-800, 0.004}, {-720, 0.008}, {-700, 0.05},
                           {-450, 0.10}, {-300, 0.15}, {0, 0.25}, {200, 0.35}, {400, 0.0}};
      break;
  }
  return tf;
}

std::filesystem::path preset_dir() {
  if (const char* env = std::getenv("LUNGBEAM_PRESET_DIR"); env && *env) return env;
  return LUNGBEAM_DEFAULT_PRESET_DIR;
}

TransferFunction preset(Preset id) {
  const auto path = preset_dir() / (preset_name(id) + ".json");
  std::error_code ec;
  if (std::filesystem::is_regular_file(path, ec)) return load_tf_file(path);
  return builtin_preset(id);
}

TransferFunction resolve_tf(const std::string& preset_or_path) {
  if (auto id = parse_preset(preset_or_path)) return preset(*id);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(preset_or_path, ec))
    fail(ErrorCode::UnknownPreset, "'" + preset_or_path + "' is neither a preset (TF1..TF6) nor a file");
  return load_tf_file(preset_or_path);
}

}  // namespace lungbeam
