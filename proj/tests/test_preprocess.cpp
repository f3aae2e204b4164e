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

#include <algorithm>
#include <cmath>
#include <random>

#include "expect.hpp"
#include "lungbeam/preprocess.hpp"
#include "phantom.hpp"

using namespace lungbeam;

namespace {

struct Field {
  double a, bx, by, bz;
  double operator()(Vec3 p) const { return a + bx * p.x + by * p.y + bz * p.z; }
};

Volume sample_field(Dims dims, Vec3 spacing, Vec3 origin, const Field& f) {
  Volume v = make_volume(dims, spacing);
  v.affine = Affine::scaling(spacing, origin);
  for (int k = 0; k < dims[2]; ++k)
    for (int j = 0; j < dims[1]; ++j)
      for (int i = 0; i < dims[0]; ++i) v.at(i, j, k) = static_cast<float>(f(v.affine.apply({double(i), double(j), double(k)})));
  return v;
}

// Where output voxel o samples the input along one axis, clamped to the
// outermost input centers.
double source_index(int o, double in_spacing, double target, int n) {
  const double u = (o + 0.5) * target / in_spacing - 0.5;
  return std::clamp(u, 0.0, n - 1.0);
}

}  // namespace

TEST_CASE("resampling reproduces affine scalar fields") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> sp(0.4, 2.6);
  std::uniform_real_distribution<double> slope(-4.0, 4.0);
  std::uniform_int_distribution<int> dim(2, 14);
  for (int trial = 0; trial < 25; ++trial) {
    const Dims dims{dim(rng), dim(rng), dim(rng)};
    const Vec3 spacing{sp(rng), sp(rng), sp(rng)};
    const Field f{2000.0, slope(rng), slope(rng), slope(rng)};
    const Volume in = sample_field(dims, spacing, {-10.0, 4.0, 7.5}, f);
    const double target = trial % 2 ? 1.0 : 0.7;
    const Volume out = resample_isotropic(in, target);

    double worst = 0.0;
    for (int k = 0; k < out.dims[2]; ++k)
      for (int j = 0; j < out.dims[1]; ++j)
        for (int i = 0; i < out.dims[0]; ++i) {
          const Vec3 u{source_index(i, spacing.x, target, dims[0]), source_index(j, spacing.y, target, dims[1]),
                       source_index(k, spacing.z, target, dims[2])};
          const double expected = f(in.affine.apply(u));
          worst = std::max(worst, std::abs(out.at(i, j, k) - expected) / std::abs(expected));
        }
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("output affine places voxel centers where they are sampled") {
  const Volume in = sample_field({10, 8, 6}, {0.8, 0.8, 2.5}, {1, 2, 3}, {0, 1, 0, 0});
  const Volume out = resample_isotropic(in, 1.0);
  CHECK(out.dims == Dims{8, 7, 15});
  for (int o = 0; o < out.dims[2]; ++o) {
    const double u = (o + 0.5) * 1.0 / 2.5 - 0.5;
    CHECK(out.affine.apply({0, 0, double(o)}).z == doctest::Approx(in.affine.apply({0, 0, u}).z));
  }
  CHECK(out.spacing == Vec3{1, 1, 1});
  CHECK(out.is_isotropic());
}

TEST_CASE("constant fields resample exactly") {
  for (float c : {-1024.0f, -700.25f, 0.0f, 3071.0f}) {
    const Volume in = make_volume({7, 5, 9}, {0.6, 0.9, 3.0}, c);
    const Volume out = resample_isotropic(in, 1.0);
    CHECK(std::all_of(out.voxels.begin(), out.voxels.end(), [c](float v) { return v == c; }));
  }
}

TEST_CASE("single-slice axes cannot be interpolated") {
  const Volume thin = make_volume({8, 8, 1}, {1, 1, 5}, -500.0f);
  CHECK_FAILS_WITH(resample_isotropic(thin, 1.0), ErrorCode::DegenerateVolume);
  const Volume ok = make_volume({8, 8, 1}, {1, 1, 1}, -500.0f);
  CHECK(resample_isotropic(ok, 1.0).dims == Dims{8, 8, 1});
}

TEST_CASE("threshold keeps probability 0.75 and above") {
  Volume p = make_volume({4, 1, 1}, {1, 1, 1}, 0.0f, ValueKind::Probability);
  p.voxels = {0.75f, std::nextafter(0.75f, 0.0f), 1.0f, 0.2f};
  const BinaryMask m = threshold_mask(p);
  CHECK(m.bits == std::vector<std::uint8_t>{1, 0, 1, 0});
  CHECK(m.count_set() == 2);

  p.voxels = {0.5f, 0.5f, 0.5f, 0.5f};
  CHECK_FAILS_WITH(threshold_mask(p), ErrorCode::EmptyMask);
}

TEST_CASE("masking sets everything outside the lungs to air") {
  Volume ct = make_volume({3, 1, 1}, {1, 1, 1});
  ct.voxels = {40.0f, -800.0f, 5000.0f};
  BinaryMask m;
  m.dims = ct.dims;
  m.spacing = ct.spacing;
  m.affine = ct.affine;
  m.bits = {0, 1, 1};
  const Volume masked = clamp_hu(apply_mask(ct, m));
  CHECK(masked.voxels == std::vector<float>{-1024.0f, -800.0f, 3071.0f});

  m.dims = {1, 3, 1};
  CHECK_FAILS_WITH(apply_mask(ct, m), ErrorCode::ShapeMismatch);
}

TEST_CASE("preprocess pair: lungs survive, body does not") {
  const Volume ct = testing::ct_phantom(32, {1.25, 1.25, 2.0});
  const Volume prob = testing::probability_phantom(32, {1.25, 1.25, 2.0});
  const PreprocessResult r = preprocess_pair(ct, prob);
  CHECK(r.masked_hu.is_isotropic());
  CHECK(r.masked_hu.dims == Dims{40, 40, 64});
  CHECK(r.mask.same_grid(r.masked_hu));
  std::size_t lung = 0;
  for (std::size_t i = 0; i < r.mask.bits.size(); ++i) {
    if (r.mask.bits[i]) {
      ++lung;
      CHECK(r.masked_hu.voxels[i] < -300.0f);
    } else {
      CHECK(r.masked_hu.voxels[i] == -1024.0f);
    }
  }
  CHECK(lung > 1000);
  // Rerun is bit-identical.
  CHECK(preprocess_pair(ct, prob).masked_hu == r.masked_hu);
}

TEST_CASE("preprocess pair rejects mismatched grids") {
  const Volume ct = testing::ct_phantom(16);
  const Volume prob = testing::probability_phantom(20);
  CHECK_FAILS_WITH(preprocess_pair(ct, prob), ErrorCode::ShapeMismatch);
}

TEST_CASE("foreground mask recovers the masked region") {
  const Volume masked = testing::masked_phantom(32);
  const BinaryMask fg = mask_from_foreground(masked);
  for (std::size_t i = 0; i < fg.bits.size(); ++i) CHECK((fg.bits[i] != 0) == (masked.voxels[i] > -1024.0f));
  CHECK(mask_to_volume(fg).value_kind == ValueKind::Binary);
}
