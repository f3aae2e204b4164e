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

#include <bit>
#include <cmath>
#include <cstring>
#include <random>

#include "expect.hpp"
#include "lungbeam/nifti.hpp"
#include "phantom.hpp"

using namespace lungbeam;

namespace {

// Minimal NIfTI-1 writer for fixtures, kept apart from the library writer.
struct Fixture {
  std::vector<std::uint8_t> bytes = std::vector<std::uint8_t>(352, 0);
  bool big = false;

  template <typename T>
  void put(std::size_t off, T value) {
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    if (big) std::reverse(raw, raw + sizeof(T));
    if (bytes.size() < off + sizeof(T)) bytes.resize(off + sizeof(T), 0);
    std::memcpy(bytes.data() + off, raw, sizeof(T));
  }

  Fixture(bool big_endian, std::array<int, 3> dims, std::int16_t datatype, std::array<float, 3> spacing)
      : big(big_endian) {
    put<std::int32_t>(0, 348);
    put<std::int16_t>(40, 3);
    for (int a = 0; a < 3; ++a) put<std::int16_t>(42 + 2 * a, static_cast<std::int16_t>(dims[a]));
    put<std::int16_t>(48, 1);
    put<std::int16_t>(70, datatype);
    put<std::int16_t>(72, datatype == 4 ? 16 : 32);
    put<float>(76, 1.0f);
    for (int a = 0; a < 3; ++a) put<float>(80 + 4 * a, spacing[a]);
    put<float>(108, 352.0f);
    std::memcpy(bytes.data() + 344, "n+1\0", 4);
  }
};

std::vector<std::uint8_t> slope_fixture(bool big, const std::vector<std::int16_t>& raw) {
  Fixture f(big, {4, 3, 2}, nifti::kDatatypeInt16, {0.7f, 0.7f, 2.5f});
  f.put<float>(112, 2.0f);
  f.put<float>(116, -1024.0f);
  for (std::size_t i = 0; i < raw.size(); ++i) f.put<std::int16_t>(352 + 2 * i, raw[i]);
  return f.bytes;
}

std::vector<std::int16_t> fixture_raw() {
  std::vector<std::int16_t> raw(24);
  for (int i = 0; i < 24; ++i) raw[i] = static_cast<std::int16_t>(i * 37 - 100);
  raw[0] = 0;     // air
  raw[1] = 512;   // water
  raw[2] = 2047;  // top of the CT range
  return raw;
}

Volume random_volume(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(1, 12);
  std::uniform_real_distribution<double> sp(0.3, 3.0);
  std::uniform_real_distribution<float> val(-1024.0f, 3071.0f);
  std::uniform_real_distribution<double> off(-200.0, 200.0);
  Volume v = make_volume({dim(rng), dim(rng), dim(rng)}, {sp(rng), sp(rng), sp(rng)});
  // Values exactly representable in float; spacing is stored as float on disk.
  for (int a = 0; a < 3; ++a) v.spacing[a] = static_cast<float>(v.spacing[a]);
  v.affine = Affine::scaling(v.spacing, {static_cast<float>(off(rng)), static_cast<float>(off(rng)),
                                         static_cast<float>(off(rng))});
  for (float& x : v.voxels) x = val(rng);
  return v;
}

}  // namespace

TEST_CASE("int16 with slope and intercept decodes to HU") {
  const auto raw = fixture_raw();
  const Volume v = nifti::parse(slope_fixture(false, raw));
  REQUIRE(v.dims == Dims{4, 3, 2});
  CHECK(v.voxels[0] == -1024.0f);
  CHECK(v.voxels[1] == 0.0f);
  CHECK(v.voxels[2] == 3070.0f);
  for (std::size_t i = 0; i < raw.size(); ++i) CHECK(v.voxels[i] == 2.0f * raw[i] - 1024.0f);
  CHECK(v.spacing.x == doctest::Approx(0.7));
  CHECK(v.spacing.z == doctest::Approx(2.5));
  CHECK(v.value_kind == ValueKind::HU);
}

TEST_CASE("big-endian fixture matches the little-endian one") {
  const auto raw = fixture_raw();
  const auto le = nifti::parse(slope_fixture(false, raw));
  const auto be = nifti::parse(slope_fixture(true, raw));
  CHECK(le == be);
  CHECK(nifti::parse_header(slope_fixture(true, raw)).endianness == nifti::Endianness::Big);
}

TEST_CASE("gzip envelope is transparent") {
  const auto raw = fixture_raw();
  const auto plain = slope_fixture(false, raw);
  const auto packed = nifti::gzip(plain);
  CHECK(nifti::is_gzip(packed));
  CHECK_FALSE(nifti::is_gzip(plain));
  CHECK(nifti::gunzip(packed) == plain);
  CHECK(nifti::parse(packed) == nifti::parse(plain));
}

TEST_CASE("affine prefers sform over qform over pixdim") {
  Fixture f(false, {2, 2, 2}, nifti::kDatatypeFloat32, {2.0f, 3.0f, 4.0f});
  f.bytes.resize(352 + 8 * 4, 0);

  SUBCASE("pixdim only") {
    const Volume v = nifti::parse(f.bytes);
    CHECK(v.affine.apply({1, 1, 1}).x == doctest::Approx(2.0));
    CHECK(v.affine.apply({1, 1, 1}).y == doctest::Approx(3.0));
    CHECK(v.affine.apply({1, 1, 1}).z == doctest::Approx(4.0));
  }
  SUBCASE("qform: 180 degrees about z") {
    f.put<std::int16_t>(252, 1);
    f.put<float>(256, 0.0f);
    f.put<float>(260, 0.0f);
    f.put<float>(264, 1.0f);
    f.put<float>(268, 10.0f);
    f.put<float>(272, 20.0f);
    f.put<float>(276, 30.0f);
    const Vec3 p = nifti::parse(f.bytes).affine.apply({1, 1, 1});
    CHECK(p.x == doctest::Approx(8.0));
    CHECK(p.y == doctest::Approx(17.0));
    CHECK(p.z == doctest::Approx(34.0));
  }
  SUBCASE("sform wins when both are set") {
    f.put<std::int16_t>(252, 1);
    f.put<float>(264, 1.0f);
    f.put<std::int16_t>(254, 2);
    const float rows[3][4] = {{1, 0, 0, -5}, {0, 1, 0, -6}, {0, 0, 1, -7}};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) f.put<float>(280 + 16 * r + 4 * c, rows[r][c]);
    std::string provenance;
    const Vec3 p = nifti::parse(f.bytes).affine.apply({1, 2, 3});
    CHECK(p.x == doctest::Approx(-4.0));
    CHECK(p.y == doctest::Approx(-4.0));
    CHECK(p.z == doctest::Approx(-4.0));
    nifti::parse_header(f.bytes).affine(&provenance);
    CHECK(provenance.find("sform") == 0);
  }
}

TEST_CASE("malformed inputs are rejected") {
  const auto good = slope_fixture(false, fixture_raw());

  auto bad = good;
  bad[0] = 0x10;
  CHECK_FAILS_WITH(nifti::parse(bad), ErrorCode::MalformedHeader);

  bad = good;
  std::memcpy(bad.data() + 344, "ni1\0", 4);
  CHECK_FAILS_WITH(nifti::parse(bad), ErrorCode::MalformedHeader);

  Fixture u8(false, {2, 2, 2}, 2, {1, 1, 1});
  u8.put<std::int16_t>(72, 8);
  u8.bytes.resize(360);
  CHECK_FAILS_WITH(nifti::parse(u8.bytes), ErrorCode::UnsupportedDatatype);

  auto cut = good;
  cut.resize(cut.size() - 3);
  CHECK_FAILS_WITH(nifti::parse(cut), ErrorCode::TruncatedData);

  CHECK_FAILS_WITH(nifti::parse(std::span(good).first(100)), ErrorCode::MalformedHeader);
  CHECK_FAILS_WITH(read_nifti("/nonexistent/volume.nii"), ErrorCode::IoFailure);
}

TEST_CASE("write then read is the identity on randomized volumes") {
  const auto dir = testing::scratch_dir("volume_io_roundtrip");
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    Volume v = random_volume(rng);
    v.value_kind = static_cast<ValueKind>(i % 3);
    if (v.value_kind != ValueKind::HU) {
      for (float& x : v.voxels) x = (i % 3 == 2) ? (x > 0 ? 1.0f : 0.0f) : std::abs(x) / 4096.0f;
    }
    const auto path = dir / (i % 2 ? "v.nii.gz" : "v.nii");
    write_nifti(v, path);
    const Volume back = read_nifti(path);
    CHECK(back == v);
    CHECK(nifti::parse(nifti::serialize(v)) == v);
  }
}

TEST_CASE("header-only read reports dims without touching voxel data") {
  const auto dir = testing::scratch_dir("volume_io_header");
  Volume v = make_volume({5, 6, 7}, {1.5, 1.5, 2.0}, -1024.0f);
  write_nifti(v, dir / "h.nii.gz");
  const auto h = nifti::read_header(dir / "h.nii.gz");
  CHECK(h.dims() == Dims{5, 6, 7});
  CHECK(h.spacing().z == doctest::Approx(2.0));
}

TEST_CASE("serialization is deterministic") {
  const auto dir = testing::scratch_dir("volume_io_bytes");
  const Volume v = testing::ct_phantom(16);
  write_nifti(v, dir / "a.nii.gz");
  write_nifti(v, dir / "b.nii.gz");
  CHECK(read_file_bytes(dir / "a.nii.gz") == read_file_bytes(dir / "b.nii.gz"));
}
