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
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lungbeam/volume.hpp"

namespace lungbeam::nifti {

enum class Endianness { Little, Big };

// NIfTI-1 datatype codes accepted by the reader.
inline constexpr int kDatatypeInt16 = 4;
inline constexpr int kDatatypeFloat32 = 16;

inline constexpr std::size_t kHeaderSize = 348;
inline constexpr std::size_t kMinVoxOffset = 352;

struct Header {
  Endianness endianness = Endianness::Little;
  std::array<std::int16_t, 8> dim{};
  std::int16_t datatype = 0;
  std::int16_t bitpix = 0;
  std::array<float, 8> pixdim{};
  float vox_offset = 0.0f;
  float scl_slope = 0.0f;
  float scl_inter = 0.0f;
  std::uint8_t xyzt_units = 0;
  std::string descrip;
  std::int16_t qform_code = 0;
  std::int16_t sform_code = 0;
  float quatern_b = 0.0f, quatern_c = 0.0f, quatern_d = 0.0f;
  float qoffset_x = 0.0f, qoffset_y = 0.0f, qoffset_z = 0.0f;
  std::array<float, 4> srow_x{}, srow_y{}, srow_z{};

  Dims dims() const { return {dim[1], dim[2], dim[3]}; }
  Vec3 spacing() const;
  // sform when sform_code > 0, else qform when qform_code > 0, else pixdim scaling.
  Affine affine(std::string* provenance = nullptr) const;
};

// Parses and validates the fixed 348-byte header (no data access).
Header parse_header(std::span<const std::uint8_t> bytes);

// Parses a complete single-file image (header + data). A gzip envelope is
// detected by its magic bytes and inflated first.
Volume parse(std::span<const std::uint8_t> bytes);

// Little-endian float32 single-file image, scl_slope 1, scl_inter 0.
std::vector<std::uint8_t> serialize(const Volume& volume);

Header read_header(const std::filesystem::path& path);
Volume read(const std::filesystem::path& path);
// Paths ending in ".gz" are written gzip-compressed.
void write(const Volume& volume, const std::filesystem::path& path);

// Inflates a gzip stream; exposed for tests.
std::vector<std::uint8_t> gunzip(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> gzip(std::span<const std::uint8_t> bytes);

bool is_gzip(std::span<const std::uint8_t> bytes);

}  // namespace lungbeam::nifti

namespace lungbeam {

inline Volume read_nifti(const std::filesystem::path& path) { return nifti::read(path); }
inline void write_nifti(const Volume& volume, const std::filesystem::path& path) {
  nifti::write(volume, path);
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
// Writes via a sibling temporary file and rename.
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace lungbeam
