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

#include "lungbeam/camera.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>

#include "lungbeam/error.hpp"

namespace lungbeam {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string to_string(Plane plane) {
  switch (plane) {
    case Plane::Axial: return "axial";
    case Plane::Coronal: return "coronal";
    case Plane::Sagittal: return "sagittal";
  }
  return "axial";
}

std::string to_string(SweepAxis axis) {
  return axis == SweepAxis::Horizontal ? "h" : "v";
}

Plane parse_plane(std::string_view text) {
  const std::string s = lower(text);
  if (s == "axial") return Plane::Axial;
  if (s == "coronal") return Plane::Coronal;
  if (s == "sagittal") return Plane::Sagittal;
  fail(ErrorCode::Usage, "unknown plane '" + std::string(text) + "'");
}

SweepAxis parse_sweep_axis(std::string_view text) {
  const std::string s = lower(text);
  if (s == "h" || s == "horizontal") return SweepAxis::Horizontal;
  if (s == "v" || s == "vertical") return SweepAxis::Vertical;
  fail(ErrorCode::Usage, "unknown sweep axis '" + std::string(text) + "'");
}

std::vector<double> orbit_angles(double max_deg, double step_deg) {
  if (!(max_deg > 0.0) || !(step_deg > 0.0))
    fail(ErrorCode::NonDivisible, "orbit max and step must be positive");
  const double ratio = max_deg / step_deg;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio))
    fail(ErrorCode::NonDivisible, "orbit max is not an integer multiple of the step");
  const int steps = static_cast<int>(n);
  std::vector<double> angles;
  angles.reserve(2 * steps + 1);
  for (int i = -steps; i <= steps; ++i) angles.push_back(max_deg * i / steps);
  return angles;
}

ViewSpec protocol_view(Plane plane, SweepAxis axis, int index) {
  if (plane == Plane::Sagittal)
    fail(ErrorCode::SagittalRequested, "the sagittal plane overlaps both lungs and is not rendered");
  if (index < 0 || index >= kViewsPerSweep)
    fail(ErrorCode::Usage, "view index must be in [0, 20]");
  static const std::vector<double> angles = orbit_angles();
  return {plane, axis, angles[static_cast<std::size_t>(index)], index};
}

std::vector<ViewSpec> build_view_specs(const std::set<Plane>& planes) {
  if (planes.empty()) fail(ErrorCode::Usage, "no planes requested");
  if (planes.contains(Plane::Sagittal))
    fail(ErrorCode::SagittalRequested, "the sagittal plane overlaps both lungs and is not rendered");
  std::vector<ViewSpec> specs;
  for (Plane plane : planes) {
    for (SweepAxis axis : {SweepAxis::Horizontal, SweepAxis::Vertical}) {
      for (int i = 0; i < kViewsPerSweep; ++i) specs.push_back(protocol_view(plane, axis, i));
    }
  }
  return specs;
}

ViewSpec parse_view(std::string_view text) {
  const auto first = text.find(':');
  const auto second = first == std::string_view::npos ? first : text.find(':', first + 1);
  if (second == std::string_view::npos)
    fail(ErrorCode::Usage, "view must look like 'plane:axis:index', got '" + std::string(text) + "'");
  const Plane plane = parse_plane(text.substr(0, first));
  const SweepAxis axis = parse_sweep_axis(text.substr(first + 1, second - first - 1));
  const std::string idx(text.substr(second + 1));
  if (idx.empty() || idx.size() > 2 || !std::all_of(idx.begin(), idx.end(), ::isdigit))
    fail(ErrorCode::Usage, "view index must be an integer in [0, 20]");
  return protocol_view(plane, axis, std::stoi(idx));
}

Vec3 plane_view_direction(Plane plane) {
  // RAS world: eye superior looking inferior (axial), anterior looking posterior (coronal).
  switch (plane) {
    case Plane::Axial: return {0.0, 0.0, -1.0};
    case Plane::Coronal: return {0.0, -1.0, 0.0};
    case Plane::Sagittal: break;
  }
  fail(ErrorCode::SagittalRequested, "the sagittal plane is not rendered");
}

Vec3 plane_up(Plane plane) {
  switch (plane) {
    case Plane::Axial: return {0.0, 1.0, 0.0};
    case Plane::Coronal: return {0.0, 0.0, 1.0};
    case Plane::Sagittal: break;
  }
  fail(ErrorCode::SagittalRequested, "the sagittal plane is not rendered");
}

MaskGeometry mask_geometry(const BinaryMask& mask) {
  std::array<int, 3> lo{std::numeric_limits<int>::max(), std::numeric_limits<int>::max(),
                        std::numeric_limits<int>::max()};
  std::array<int, 3> hi{-1, -1, -1};
  double sx = 0.0, sy = 0.0, sz = 0.0;
  std::size_t count = 0;
  std::size_t idx = 0;
  for (int k = 0; k < mask.dims[2]; ++k) {
    for (int j = 0; j < mask.dims[1]; ++j) {
      for (int i = 0; i < mask.dims[0]; ++i, ++idx) {
        if (!mask.bits[idx]) continue;
        sx += i;
        sy += j;
        sz += k;
        ++count;
        lo = {std::min(lo[0], i), std::min(lo[1], j), std::min(lo[2], k)};
        hi = {std::max(hi[0], i), std::max(hi[1], j), std::max(hi[2], k)};
      }
    }
  }
  if (count == 0) fail(ErrorCode::EmptyMask, "mask has no set voxels");
  const double n = static_cast<double>(count);
  MaskGeometry g;
  g.centroid = mask.affine.apply({sx / n, sy / n, sz / n});
  for (int c = 0; c < 8; ++c) {
    const Vec3 ijk{(c & 1) ? hi[0] + 0.5 : lo[0] - 0.5, (c & 2) ? hi[1] + 0.5 : lo[1] - 0.5,
                   (c & 4) ? hi[2] + 0.5 : lo[2] - 0.5};
    g.corners.push_back(mask.affine.apply(ijk));
  }
  return g;
}

Camera camera_pose(Plane plane, SweepAxis axis, double angle_deg, const MaskGeometry& geometry,
                   int image_px) {
  if (image_px < 1) fail(ErrorCode::Usage, "image size must be positive");
  const Vec3 dir0 = plane_view_direction(plane);
  const Vec3 up0 = plane_up(plane);
  const Vec3 right0 = normalized(cross(dir0, up0));
  const Vec3 pivot = axis == SweepAxis::Horizontal ? up0 : right0;
  const double rad = angle_deg * std::numbers::pi / 180.0;

  const Vec3 dir = normalized(rotate(dir0, pivot, rad));
  Vec3 up = rotate(up0, pivot, rad);
  up = normalized(up - dot(up, dir) * dir);
  const Vec3 right = normalized(cross(dir, up));

  double half = 0.0;
  double reach = 0.0;
  for (const Vec3& corner : geometry.corners) {
    const Vec3 d = corner - geometry.centroid;
    half = std::max({half, std::abs(dot(d, right)), std::abs(dot(d, up))});
    reach = std::max(reach, norm(d));
  }
  half *= 1.0 + kFrameMargin;

  Camera cam;
  cam.look_at = geometry.centroid;
  cam.eye = geometry.centroid - (reach + 10.0) * dir;
  cam.up = up;
  cam.right = right;
  cam.half_width = half;
  cam.half_height = half;
  cam.image_px = image_px;
  return cam;
}

Camera camera_pose(const ViewSpec& spec, const BinaryMask& mask, int image_px) {
  return camera_pose(spec.plane, spec.sweep_axis, spec.angle_deg, mask_geometry(mask), image_px);
}

}  // namespace lungbeam
