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

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "expect.hpp"
#include "lungbeam/camera.hpp"
#include "phantom.hpp"

using namespace lungbeam;

namespace {

BinaryMask box_mask(Dims dims, std::array<int, 3> lo, std::array<int, 3> hi) {
  BinaryMask m;
  m.dims = dims;
  m.affine = Affine::scaling({1, 1, 1}, {-10, -20, -30});
  m.bits.assign(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2], 0);
  for (int k = lo[2]; k <= hi[2]; ++k)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int i = lo[0]; i <= hi[0]; ++i) m.bits[i + dims[0] * (j + dims[1] * k)] = 1;
  return m;
}

void check_close(Vec3 a, Vec3 b, double tol = 1e-12) {
  CHECK(a.x == doctest::Approx(b.x).epsilon(tol).scale(1.0));
  CHECK(a.y == doctest::Approx(b.y).epsilon(tol).scale(1.0));
  CHECK(a.z == doctest::Approx(b.z).epsilon(tol).scale(1.0));
}

}  // namespace

TEST_CASE("orbit grid: 21 angles from -12 to +12 in 1.2 degree steps") {
  const auto a = orbit_angles();
  REQUIRE(a.size() == 21);
  CHECK(a.front() == -12.0);
  CHECK(a.back() == 12.0);
  CHECK(a[10] == 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == doctest::Approx(-12.0 + 1.2 * static_cast<double>(i)).epsilon(1e-12));
    CHECK(a[i] == -a[a.size() - 1 - i]);
  }
  CHECK(orbit_angles(10.0, 2.5).size() == 9);
  CHECK_FAILS_WITH(orbit_angles(12.0, 5.0), ErrorCode::NonDivisible);
  CHECK_FAILS_WITH(orbit_angles(12.0, 0.0), ErrorCode::NonDivisible);
}

TEST_CASE("view specs: 42 per plane, 84 for both") {
  const auto both = build_view_specs({Plane::Axial, Plane::Coronal});
  CHECK(both.size() == 84);
  CHECK(build_view_specs({Plane::Coronal}).size() == 42);
  int h = 0;
  for (const auto& s : both) h += s.sweep_axis == SweepAxis::Horizontal;
  CHECK(h == 42);
  CHECK(both.front() == ViewSpec{Plane::Axial, SweepAxis::Horizontal, -12.0, 0});
  CHECK(both.back() == ViewSpec{Plane::Coronal, SweepAxis::Vertical, 12.0, 20});
  CHECK_FAILS_WITH(build_view_specs({Plane::Sagittal}), ErrorCode::SagittalRequested);
  CHECK_FAILS_WITH(build_view_specs({Plane::Axial, Plane::Sagittal}), ErrorCode::SagittalRequested);
}

TEST_CASE("view strings") {
  CHECK(parse_view("axial:h:10") == ViewSpec{Plane::Axial, SweepAxis::Horizontal, 0.0, 10});
  CHECK(parse_view("coronal:v:0").angle_deg == -12.0);
  CHECK(parse_view("Coronal:vertical:20").angle_deg == 12.0);
  CHECK_FAILS_WITH(parse_view("sagittal:h:0"), ErrorCode::SagittalRequested);
  CHECK_FAILS_WITH(parse_view("axial:h:21"), ErrorCode::Usage);
  CHECK_FAILS_WITH(parse_view("axial:x:3"), ErrorCode::Usage);
  CHECK_FAILS_WITH(parse_view("axial:h"), ErrorCode::Usage);
  CHECK_FAILS_WITH(parse_view("axial:h:-1"), ErrorCode::Usage);
}

TEST_CASE("zero-degree poses look along the anatomical axes") {
  const BinaryMask m = box_mask({20, 20, 20}, {5, 6, 7}, {12, 13, 14});
  const MaskGeometry g = mask_geometry(m);
  check_close(g.centroid, {-10 + 8.5, -20 + 9.5, -30 + 10.5});

  const Camera ax = camera_pose(Plane::Axial, SweepAxis::Horizontal, 0.0, g);
  check_close(ax.view_direction(), {0, 0, -1});
  check_close(ax.up, {0, 1, 0});
  check_close(ax.look_at, g.centroid);
  CHECK(ax.eye.z > g.centroid.z);

  const Camera co = camera_pose(Plane::Coronal, SweepAxis::Vertical, 0.0, g);
  check_close(co.view_direction(), {0, -1, 0});
  check_close(co.up, {0, 0, 1});
  CHECK(ax.image_px == 448);
}

TEST_CASE("sweeps rotate about the image axes and keep the framing") {
  const BinaryMask m = box_mask({30, 30, 30}, {3, 8, 2}, {25, 20, 27});
  const MaskGeometry g = mask_geometry(m);
  for (Plane plane : {Plane::Axial, Plane::Coronal}) {
    const Camera c0 = camera_pose(plane, SweepAxis::Horizontal, 0.0, g);
    for (SweepAxis axis : {SweepAxis::Horizontal, SweepAxis::Vertical}) {
      for (double angle : orbit_angles()) {
        const Camera c = camera_pose(plane, axis, angle, g);
        const Vec3 d = c.view_direction();
        // Orthonormal frame.
        CHECK(dot(d, c.up) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
        CHECK(dot(d, c.right) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
        CHECK(norm(c.up) == doctest::Approx(1.0));
        // Angle from the base direction equals the requested angle.
        const double got = std::acos(std::clamp(dot(d, c0.view_direction()), -1.0, 1.0)) * 180.0 / std::numbers::pi;
        CHECK(got == doctest::Approx(std::abs(angle)).epsilon(1e-9).scale(1.0));
        // The rotation pivot stays fixed.
        if (axis == SweepAxis::Horizontal) {
          check_close(c.up, c0.up);
        } else {
          check_close(c.right, c0.right);
        }
        // Every bounding-box corner projects inside the frame.
        for (const Vec3& corner : g.corners) {
          const Vec3 r = corner - c.look_at;
          CHECK(std::abs(dot(r, c.right)) <= c.half_width);
          CHECK(std::abs(dot(r, c.up)) <= c.half_height);
        }
        CHECK(c.half_width == c.half_height);
      }
    }
  }
}

TEST_CASE("frame size scales with resolution only through pixel count") {
  const BinaryMask m = box_mask({16, 16, 16}, {2, 2, 2}, {13, 9, 11});
  const MaskGeometry g = mask_geometry(m);
  const Camera a = camera_pose(Plane::Axial, SweepAxis::Vertical, 3.6, g, 448);
  const Camera b = camera_pose(Plane::Axial, SweepAxis::Vertical, 3.6, g, 64);
  CHECK(a.half_width == b.half_width);
  CHECK(b.image_px == 64);
}

TEST_CASE("empty masks have no pose") {
  const BinaryMask m = box_mask({4, 4, 4}, {1, 1, 1}, {0, 0, 0});
  CHECK_FAILS_WITH(mask_geometry(m), ErrorCode::EmptyMask);
}
