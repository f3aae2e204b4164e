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

#include <cstdint>
#include <vector>

#include "lungbeam/volume.hpp"

namespace lungbeam {

inline constexpr double kAirHu = -1024.0;
inline constexpr double kMaxHu = 3071.0;
inline constexpr double kLungProbabilityThreshold = 0.75;

// One byte per voxel (0 or 1), same grid as the volume it was derived from.
struct BinaryMask {
  Dims dims{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0};
  Affine affine;
  std::vector<std::uint8_t> bits;

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }
  std::size_t count_set() const;
  bool empty() const { return count_set() == 0; }

  bool same_grid(const Volume& v) const { return v.dims == dims && v.spacing == spacing; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

// Trilinear resampling onto an isotropic grid of `target_spacing_mm`. Output
// voxel o along an axis is centered (o + 0.5) * t mm from the input grid's
// outer corner; samples beyond the outermost input centers clamp to the edge.
Volume resample_isotropic(const Volume& volume, double target_spacing_mm = 1.0);

// Bit set iff voxel >= threshold. Throws EmptyMask when nothing survives.
BinaryMask threshold_mask(const Volume& probability,
                          double threshold = kLungProbabilityThreshold);

Volume apply_mask(const Volume& volume, const BinaryMask& mask, double background_hu = kAirHu);

Volume clamp_hu(const Volume& volume, double lo = kAirHu, double hi = kMaxHu);

// Binary-kind volume (0/1 voxels) for saving a mask as NIfTI.
Volume mask_to_volume(const BinaryMask& mask);

// Mask of voxels strictly above `background_hu`; recovers the lung region of
// an already masked CT volume.
BinaryMask mask_from_foreground(const Volume& volume, double background_hu = kAirHu);

struct PreprocessResult {
  Volume masked_hu;
  BinaryMask mask;
};

// resample both -> threshold -> apply mask -> clamp.
PreprocessResult preprocess_pair(const Volume& ct, const Volume& probability,
                                 double target_spacing_mm = 1.0,
                                 double threshold = kLungProbabilityThreshold);

}  // namespace lungbeam
