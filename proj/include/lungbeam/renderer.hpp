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

#include <span>
#include <vector>

#include "lungbeam/camera.hpp"
#include "lungbeam/image.hpp"
#include "lungbeam/preprocess.hpp"
#include "lungbeam/transfer_function.hpp"
#include "lungbeam/volume.hpp"

namespace lungbeam {

inline constexpr double kDefaultStepMm = 0.5;
inline constexpr double kEarlyTerminationAlpha = 0.999;

struct RenderOptions {
  double step_mm = kDefaultStepMm;
  // 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
  bool early_termination = true;
  double background_hu = kAirHu;
};

// Front-to-back emission-absorption over samples ordered near to far. Each
// sample carries straight (non-premultiplied) color and its segment opacity;
// the result carries premultiplied color and accumulated alpha.
Rgba composite_front_to_back(std::span<const Rgba> samples, bool early_termination = false);

// Trilinear HU at a world point; background_hu outside the voxel box. Points
// between the outermost voxel centers and the box faces clamp to the edge.
double sample_hu(const Volume& volume, Vec3 point_mm, double background_hu = kAirHu);

// Premultiplied color and accumulated alpha per pixel, before compositing
// over the background.
struct RenderBuffer {
  int width = 0;
  int height = 0;
  std::vector<Rgba> pixels;

  const Rgba& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

RenderBuffer render_linear(const Volume& volume, const TransferFunction& tf, const Camera& camera,
                           const RenderOptions& options = {});

// Composite over opaque black and quantize to 8 bits. Throws NonIsotropicVolume.
Image render(const Volume& volume, const TransferFunction& tf, const Camera& camera,
             const RenderOptions& options = {});

Image to_image(const RenderBuffer& buffer);

// Dense activation grid in [0,1], row-major from the top-left.
struct ActivationMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

// MATLAB-style jet: (0,0,0.5) at 0 through blue, cyan, yellow to (0.5,0,0) at 1.
std::array<double, 3> jet(double x);

// Element-wise mean of equally sized maps.
ActivationMap mean_activation(std::span<const ActivationMap> maps);

// out = (1 - blend) * base + blend * jet(activation), activation resized
// bilinearly to the base resolution. Throws ValueOutOfRange.
Image overlay_heatmap(const Image& base, const ActivationMap& activation, double blend = 0.4);

// Comma- or whitespace-separated rows of numbers.
ActivationMap load_activation_csv(const std::filesystem::path& path);

}  // namespace lungbeam
