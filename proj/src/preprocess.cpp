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

#include "lungbeam/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lungbeam/error.hpp"

namespace lungbeam {
namespace {

struct AxisTap {
  int lo = 0;
  int hi = 0;
  double w = 0.0;  // weight of `hi`
};

std::vector<AxisTap> axis_taps(int in_dim, double in_spacing, int out_dim, double target) {
  std::vector<AxisTap> taps(static_cast<std::size_t>(out_dim));
  const double ratio = target / in_spacing;
  for (int o = 0; o < out_dim; ++o) {
    double u = (o + 0.5) * ratio - 0.5;
    u = std::clamp(u, 0.0, static_cast<double>(in_dim - 1));
    const int lo = static_cast<int>(std::floor(u));
    const int hi = std::min(lo + 1, in_dim - 1);
    taps[o] = {lo, hi, u - lo};
  }
  return taps;
}

double lerp(double a, double b, double w) { return a + w * (b - a); }

}  // namespace

std::size_t BinaryMask::count_set() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

Volume resample_isotropic(const Volume& volume, double target_spacing_mm) {
  volume.validate();
  if (!(target_spacing_mm > 0.0)) fail(ErrorCode::DegenerateVolume, "target spacing must be positive");
  if (volume.value_kind == ValueKind::Binary)
    fail(ErrorCode::InvalidVolume, "binary volumes are not resampled; threshold after resampling");

  Volume out;
  out.value_kind = volume.value_kind;
  out.spacing = {target_spacing_mm, target_spacing_mm, target_spacing_mm};
  out.provenance = volume.provenance;
  std::array<std::vector<AxisTap>, 3> taps;
  Affine affine = volume.affine;
  for (int a = 0; a < 3; ++a) {
    const double s = volume.spacing[a];
    const int n = volume.dims[a];
    if (n < 2 && s != target_spacing_mm)
      fail(ErrorCode::DegenerateVolume,
           "axis " + std::to_string(a) + " has a single voxel but needs interpolation");
    const double extent = n * s / target_spacing_mm;
    out.dims[a] = std::max(1, static_cast<int>(std::ceil(extent - 1e-9)));
    taps[a] = axis_taps(n, s, out.dims[a], target_spacing_mm);
    const double ratio = target_spacing_mm / s;
    affine.set_column(a, ratio * volume.affine.column(a));
  }
  const Vec3 first_center{0.5 * target_spacing_mm / volume.spacing.x - 0.5,
                          0.5 * target_spacing_mm / volume.spacing.y - 0.5,
                          0.5 * target_spacing_mm / volume.spacing.z - 0.5};
  affine.set_column(3, volume.affine.apply(first_center));
  out.affine = affine;

  out.voxels.resize(out.voxel_count());
  std::size_t idx = 0;
  for (int k = 0; k < out.dims[2]; ++k) {
    const AxisTap tz = taps[2][k];
    for (int j = 0; j < out.dims[1]; ++j) {
      const AxisTap ty = taps[1][j];
      for (int i = 0; i < out.dims[0]; ++i, ++idx) {
        const AxisTap tx = taps[0][i];
        const double c00 = lerp(volume.at(tx.lo, ty.lo, tz.lo), volume.at(tx.hi, ty.lo, tz.lo), tx.w);
        const double c10 = lerp(volume.at(tx.lo, ty.hi, tz.lo), volume.at(tx.hi, ty.hi, tz.lo), tx.w);
        const double c01 = lerp(volume.at(tx.lo, ty.lo, tz.hi), volume.at(tx.hi, ty.lo, tz.hi), tx.w);
        const double c11 = lerp(volume.at(tx.lo, ty.hi, tz.hi), volume.at(tx.hi, ty.hi, tz.hi), tx.w);
        double v = lerp(lerp(c00, c10, ty.w), lerp(c01, c11, ty.w), tz.w);
        if (out.value_kind == ValueKind::Probability) v = std::clamp(v, 0.0, 1.0);
        out.voxels[idx] = static_cast<float>(v);
      }
    }
  }
  return out;
}

BinaryMask threshold_mask(const Volume& probability, double threshold) {
  if (probability.value_kind != ValueKind::Probability)
    fail(ErrorCode::InvalidVolume, "threshold_mask expects a probability volume");
  BinaryMask mask;
  mask.dims = probability.dims;
  mask.spacing = probability.spacing;
  mask.affine = probability.affine;
  mask.bits.resize(probability.voxels.size());
  std::transform(probability.voxels.begin(), probability.voxels.end(), mask.bits.begin(),
                 [threshold](float v) { return static_cast<std::uint8_t>(v >= threshold); });
  if (mask.empty())
    fail(ErrorCode::EmptyMask, "no voxel reaches probability " + std::to_string(threshold));
  return mask;
}

Volume apply_mask(const Volume& volume, const BinaryMask& mask, double background_hu) {
  if (!mask.same_grid(volume) || mask.bits.size() != volume.voxels.size())
    fail(ErrorCode::ShapeMismatch, "mask grid differs from volume grid");
  Volume out = volume;
  const auto bg = static_cast<float>(background_hu);
  for (std::size_t i = 0; i < out.voxels.size(); ++i) {
    if (!mask.bits[i]) out.voxels[i] = bg;
  }
  return out;
}

Volume clamp_hu(const Volume& volume, double lo, double hi) {
  Volume out = volume;
  const auto flo = static_cast<float>(lo);
  const auto fhi = static_cast<float>(hi);
  for (float& v : out.voxels) v = std::clamp(v, flo, fhi);
  return out;
}

Volume mask_to_volume(const BinaryMask& mask) {
  Volume v;
  v.dims = mask.dims;
  v.spacing = mask.spacing;
  v.affine = mask.affine;
  v.value_kind = ValueKind::Binary;
  v.voxels.assign(mask.bits.begin(), mask.bits.end());
  return v;
}

BinaryMask mask_from_foreground(const Volume& volume, double background_hu) {
  BinaryMask mask;
  mask.dims = volume.dims;
  mask.spacing = volume.spacing;
  mask.affine = volume.affine;
  mask.bits.resize(volume.voxels.size());
  std::transform(volume.voxels.begin(), volume.voxels.end(), mask.bits.begin(),
                 [background_hu](float v) { return static_cast<std::uint8_t>(v > background_hu); });
  return mask;
}

PreprocessResult preprocess_pair(const Volume& ct, const Volume& probability,
                                 double target_spacing_mm, double threshold) {
  if (ct.dims != probability.dims)
    fail(ErrorCode::ShapeMismatch, "CT and probability volumes have different dims");
  for (int a = 0; a < 3; ++a) {
    if (std::abs(ct.spacing[a] - probability.spacing[a]) > 1e-4 * ct.spacing[a])
      fail(ErrorCode::ShapeMismatch, "CT and probability volumes have different spacing");
  }
  Volume ct_iso = resample_isotropic(ct, target_spacing_mm);
  // Same grid up to header rounding; share the CT geometry so the masks align bit-for-bit.
  Volume prob = probability;
  prob.value_kind = ValueKind::Probability;
  prob.spacing = ct.spacing;
  prob.affine = ct.affine;
  const Volume prob_iso = resample_isotropic(prob, target_spacing_mm);
  BinaryMask mask = threshold_mask(prob_iso, threshold);
  Volume masked = clamp_hu(apply_mask(ct_iso, mask));
  return {std::move(masked), std::move(mask)};
}

}  // namespace lungbeam
