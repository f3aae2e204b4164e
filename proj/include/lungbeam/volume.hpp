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
#include <cstddef>
#include <string>
#include <vector>

#include "lungbeam/geometry.hpp"

namespace lungbeam {

enum class ValueKind { HU, Probability, Binary };

std::string to_string(ValueKind kind);

using Dims = std::array<int, 3>;

// Dense scalar grid, x fastest. Indices map to world mm through `affine`
// (voxel centers at integer indices).
struct Volume {
  Dims dims{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0};
  Affine affine;
  std::vector<float> voxels;
  ValueKind value_kind = ValueKind::HU;
  // Where the affine came from (sform, qform or pixdim); informational only.
  std::string provenance;

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * k);
  }

  float at(int i, int j, int k) const { return voxels[index(i, j, k)]; }
  float& at(int i, int j, int k) { return voxels[index(i, j, k)]; }

  bool is_isotropic(double tolerance = 1e-6) const;

  // Throws Error(InvalidVolume) when any structural or value invariant fails.
  void validate() const;

  // Compares geometry and voxels; provenance is ignored.
  friend bool operator==(const Volume& a, const Volume& b) {
    return a.dims == b.dims && a.spacing == b.spacing && a.affine == b.affine &&
           a.value_kind == b.value_kind && a.voxels == b.voxels;
  }
};

Volume make_volume(Dims dims, Vec3 spacing, float fill = 0.0f,
                   ValueKind kind = ValueKind::HU);

}  // namespace lungbeam
