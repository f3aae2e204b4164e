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

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lungbeam/geometry.hpp"
#include "lungbeam/preprocess.hpp"

namespace lungbeam {

inline constexpr double kOrbitMaxDeg = 12.0;
inline constexpr double kOrbitStepDeg = 1.2;
inline constexpr int kViewsPerSweep = 21;
inline constexpr int kViewsPerPlane = 2 * kViewsPerSweep;
inline constexpr int kDefaultImagePx = 448;
inline constexpr double kFrameMargin = 0.05;

enum class Plane { Axial, Coronal, Sagittal };

// Horizontal: rotation about the image's vertical axis (camera moves
// left/right). Vertical: rotation about the image's horizontal axis.
enum class SweepAxis { Horizontal, Vertical };

std::string to_string(Plane plane);
std::string to_string(SweepAxis axis);
// Accepts "axial"/"coronal"/"sagittal"; throws Usage otherwise.
Plane parse_plane(std::string_view text);
// Accepts "h"/"horizontal"/"v"/"vertical".
SweepAxis parse_sweep_axis(std::string_view text);

struct ViewSpec {
  Plane plane = Plane::Axial;
  SweepAxis sweep_axis = SweepAxis::Horizontal;
  double angle_deg = 0.0;
  int index = 10;

  friend bool operator==(const ViewSpec&, const ViewSpec&) = default;
};

// Orthographic camera. Rays travel along (look_at - eye); the image plane is
// spanned by `right` and `up`, half_width/half_height in mm.
struct Camera {
  Vec3 eye;
  Vec3 look_at;
  Vec3 up;
  Vec3 right;
  double half_width = 1.0;
  double half_height = 1.0;
  int image_px = kDefaultImagePx;

  Vec3 view_direction() const { return normalized(look_at - eye); }

  friend bool operator==(const Camera&, const Camera&) = default;
};

// [-max, -max + step, ..., +max]; entries are computed as (i - n) * step so
// the list is exactly symmetric and contains 0.
std::vector<double> orbit_angles(double max_deg = kOrbitMaxDeg, double step_deg = kOrbitStepDeg);

// Ordered by (plane, axis, index). Throws SagittalRequested.
std::vector<ViewSpec> build_view_specs(const std::set<Plane>& planes);

// Canonical protocol view; index in [0, 20].
ViewSpec protocol_view(Plane plane, SweepAxis axis, int index);

// "axial:h:10" -> protocol view. Throws Usage / SagittalRequested.
ViewSpec parse_view(std::string_view text);

// Mask centroid and corners of the set-voxel bounding box, in world mm.
struct MaskGeometry {
  Vec3 centroid;
  std::vector<Vec3> corners;  // 8 points
};
MaskGeometry mask_geometry(const BinaryMask& mask);

Camera camera_pose(Plane plane, SweepAxis axis, double angle_deg, const MaskGeometry& geometry,
                   int image_px = kDefaultImagePx);
Camera camera_pose(const ViewSpec& spec, const BinaryMask& mask, int image_px = kDefaultImagePx);

// Base (0 deg) view direction and up vector for a plane, RAS world axes.
Vec3 plane_view_direction(Plane plane);
Vec3 plane_up(Plane plane);

}  // namespace lungbeam
