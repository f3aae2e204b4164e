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

#include "lungbeam/volume.hpp"

#include <cmath>
#include <stdexcept>

#include "lungbeam/error.hpp"

namespace lungbeam {

Affine Affine::inverse() const {
  const double a = m[0][0], b = m[0][1], c = m[0][2];
  const double d = m[1][0], e = m[1][1], f = m[1][2];
  const double g = m[2][0], h = m[2][1], k = m[2][2];
  const double det = a * (e * k - f * h) - b * (d * k - f * g) + c * (d * h - e * g);
  if (det == 0.0 || !std::isfinite(det)) throw std::domain_error("singular affine");
  const double s = 1.0 / det;
  Affine inv;
  inv.m[0] = {(e * k - f * h) * s, (c * h - b * k) * s, (b * f - c * e) * s, 0.0};
  inv.m[1] = {(f * g - d * k) * s, (a * k - c * g) * s, (c * d - a * f) * s, 0.0};
  inv.m[2] = {(d * h - e * g) * s, (b * g - a * h) * s, (a * e - b * d) * s, 0.0};
  const Vec3 t = inv.apply_linear(translation());
  inv.m[0][3] = -t.x;
  inv.m[1][3] = -t.y;
  inv.m[2][3] = -t.z;
  return inv;
}

Affine Affine::scaling(Vec3 spacing, Vec3 origin) {
  Affine a;
  a.m[0] = {spacing.x, 0, 0, origin.x};
  a.m[1] = {0, spacing.y, 0, origin.y};
  a.m[2] = {0, 0, spacing.z, origin.z};
  return a;
}

std::string to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::HU: return "hu";
    case ValueKind::Probability: return "probability";
    case ValueKind::Binary: return "binary";
  }
  return "hu";
}

bool Volume::is_isotropic(double tolerance) const {
  return std::abs(spacing.x - spacing.y) <= tolerance &&
         std::abs(spacing.x - spacing.z) <= tolerance;
}

void Volume::validate() const {
  for (int d : dims) {
    if (d < 1) fail(ErrorCode::InvalidVolume, "dims must be >= 1");
  }
  for (int a = 0; a < 3; ++a) {
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
      fail(ErrorCode::InvalidVolume, "spacing must be positive");
  }
  if (voxels.size() != voxel_count())
    fail(ErrorCode::InvalidVolume, "voxel buffer length does not match dims");
  if (value_kind == ValueKind::Probability) {
    for (float v : voxels) {
      if (!(v >= 0.0f && v <= 1.0f))
        fail(ErrorCode::InvalidVolume, "probability voxel outside [0,1]");
    }
  } else if (value_kind == ValueKind::Binary) {
    for (float v : voxels) {
      if (v != 0.0f && v != 1.0f) fail(ErrorCode::InvalidVolume, "binary voxel not in {0,1}");
    }
  }
}

Volume make_volume(Dims dims, Vec3 spacing, float fill, ValueKind kind) {
  Volume v;
  v.dims = dims;
  v.spacing = spacing;
  v.affine = Affine::scaling(spacing);
  v.value_kind = kind;
  v.voxels.assign(v.voxel_count(), fill);
  return v;
}

}  // namespace lungbeam
