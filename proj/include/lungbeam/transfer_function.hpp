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

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lungbeam {

struct ColorPoint {
  double hu = 0.0;
  double r = 0.0, g = 0.0, b = 0.0;
  friend bool operator==(const ColorPoint&, const ColorPoint&) = default;
};

struct OpacityPoint {
  double hu = 0.0;
  double alpha = 0.0;
  friend bool operator==(const OpacityPoint&, const OpacityPoint&) = default;
};

struct Rgba {
  double r = 0.0, g = 0.0, b = 0.0, a = 0.0;
  friend bool operator==(const Rgba&, const Rgba&) = default;
};

// Piecewise-linear HU -> color and HU -> opacity maps on independent control
// point lists. Color clamps to the end points outside its list; opacity is
// zero outside the hull of its list. Opacities are per `reference_step_mm`.
struct TransferFunction {
  std::string name;
  std::vector<ColorPoint> color_points;
  std::vector<OpacityPoint> opacity_points;
  double reference_step_mm = 1.0;

  // Throws SchemaViolation / NonMonotonicPoints naming the offending field.
  void validate() const;

  Rgba evaluate(double hu) const;
  std::array<double, 3> color(double hu) const;
  double opacity(double hu) const;

  friend bool operator==(const TransferFunction&, const TransferFunction&) = default;
};

// 1 - (1 - alpha)^(step / reference): opacity of a `step_mm` segment given
// the opacity of a `reference_step_mm` segment of the same material.
double opacity_correct(double alpha, double step_mm, double reference_step_mm);

// JSON: {"name", "reference_step_mm", "color": [[hu,r,g,b],...], "opacity": [[hu,a],...]}
TransferFunction load_tf(std::string_view text);
std::string serialize_tf(const TransferFunction& tf);

TransferFunction load_tf_file(const std::filesystem::path& path);
void save_tf_file(const TransferFunction& tf, const std::filesystem::path& path);

enum class Preset { TF1, TF2, TF3, TF4, TF5, TF6 };

inline constexpr std::array<Preset, 6> kAllPresets = {Preset::TF1, Preset::TF2, Preset::TF3,
                                                      Preset::TF4, Preset::TF5, Preset::TF6};
inline constexpr Preset kDefaultPreset = Preset::TF6;

std::string preset_name(Preset id);
std::optional<Preset> parse_preset(std::string_view name);

// Built-in control points.
TransferFunction builtin_preset(Preset id);

// LUNGBEAM_PRESET_DIR when set, else the presets/ directory shipped with the build.
std::filesystem::path preset_dir();

// Preset file from preset_dir() when present, else the built-in table.
TransferFunction preset(Preset id);

// A preset name ("TF1".."TF6") or a path to a TF document.
TransferFunction resolve_tf(const std::string& preset_or_path);

}  // namespace lungbeam
