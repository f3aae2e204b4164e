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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lungbeam/camera.hpp"

namespace lungbeam {

struct ImageMeta {
  std::optional<ViewSpec> view;
  std::string patient_id;
  std::string tf_name;
};

// 8-bit RGBA, row-major from the top-left pixel.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgba;
  ImageMeta meta;

  Image() = default;
  Image(int w, int h, std::array<std::uint8_t, 4> fill = {0, 0, 0, 255});

  std::uint8_t* pixel(int x, int y) { return rgba.data() + 4 * (static_cast<std::size_t>(y) * width + x); }
  const std::uint8_t* pixel(int x, int y) const {
    return rgba.data() + 4 * (static_cast<std::size_t>(y) * width + x);
  }

  // Pixel data only; meta is not compared.
  bool same_pixels(const Image& other) const {
    return width == other.width && height == other.height && rgba == other.rgba;
  }
};

// Round half away from zero of v * 255 after clamping v to [0, 1].
std::uint8_t quantize_unit(double v);

std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_png(std::span<const std::uint8_t> bytes);
void write_png(const Image& image, const std::filesystem::path& path);
Image read_png(const std::filesystem::path& path);

}  // namespace lungbeam
