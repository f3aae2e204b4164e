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

#include "lungbeam/nifti.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "lungbeam/error.hpp"

namespace lungbeam {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::IoFailure, "read error on " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ostringstream suffix;
  suffix << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id());
  std::filesystem::path tmp = path;
  tmp += suffix.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::IoFailure, "write error on " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::IoFailure, "cannot replace " + path.string());
  }
}

}  // namespace lungbeam

namespace lungbeam::nifti {
namespace {

constexpr char kMagic[4] = {'n', '+', '1', '\0'};
constexpr const char* kKindTag = "lungbeam kind=";

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, bool swap) : bytes_(bytes), swap_(swap) {}

  template <typename T>
  T get(std::size_t offset) const {
    std::array<std::uint8_t, sizeof(T)> raw;
    std::memcpy(raw.data(), bytes_.data() + offset, sizeof(T));
    if (swap_) std::reverse(raw.begin(), raw.end());
    return std::bit_cast<T>(raw);
  }

 private:
  std::span<const std::uint8_t> bytes_;
  bool swap_;
};

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  template <typename T>
  void put(std::size_t offset, T value) {
    static_assert(std::endian::native == std::endian::little);
    const auto raw = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(value);
    std::memcpy(out_.data() + offset, raw.data(), sizeof(T));
  }

 private:
  std::vector<std::uint8_t>& out_;
};

std::string read_cstring(std::span<const std::uint8_t> bytes, std::size_t offset,
                         std::size_t max) {
  std::string s;
  for (std::size_t i = 0; i < max && bytes[offset + i] != 0; ++i) {
    s.push_back(static_cast<char>(bytes[offset + i]));
  }
  return s;
}

ValueKind kind_from_descrip(const std::string& descrip) {
  const std::string tag = kKindTag;
  if (descrip.rfind(tag, 0) != 0) return ValueKind::HU;
  const std::string kind = descrip.substr(tag.size());
  if (kind == "probability") return ValueKind::Probability;
  if (kind == "binary") return ValueKind::Binary;
  return ValueKind::HU;
}

}  // namespace

bool is_gzip(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b;
}

std::vector<std::uint8_t> gunzip(std::span<const std::uint8_t> bytes) {
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 16) != Z_OK) fail(ErrorCode::IoFailure, "inflateInit failed");
  std::vector<std::uint8_t> out;
  std::array<std::uint8_t, 1 << 16> chunk;
  zs.next_in = const_cast<Bytef*>(bytes.data());
  zs.avail_in = static_cast<uInt>(bytes.size());
  int rc = Z_OK;
  while (true) {
    zs.next_out = chunk.data();
    zs.avail_out = static_cast<uInt>(chunk.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    out.insert(out.end(), chunk.data(), chunk.data() + (chunk.size() - zs.avail_out));
    if (rc == Z_STREAM_END) {
      // Concatenated gzip members.
      if (zs.avail_in > 0 && is_gzip({zs.next_in, zs.avail_in})) {
        inflateReset(&zs);
        continue;
      }
      break;
    }
    if (rc != Z_OK) {
      inflateEnd(&zs);
      fail(ErrorCode::TruncatedData, "corrupt or truncated gzip stream");
    }
    if (zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      fail(ErrorCode::TruncatedData, "gzip stream ended early");
    }
  }
  inflateEnd(&zs);
  return out;
}

std::vector<std::uint8_t> gzip(std::span<const std::uint8_t> bytes) {
  z_stream zs{};
  if (deflateInit2(&zs, 6, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    fail(ErrorCode::IoFailure, "deflateInit failed");
  std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(bytes.size())) + 32);
  zs.next_in = const_cast<Bytef*>(bytes.data());
  zs.avail_in = static_cast<uInt>(bytes.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) fail(ErrorCode::IoFailure, "deflate failed");
  out.resize(zs.total_out);
  return out;
}

Vec3 Header::spacing() const {
  return {std::abs(static_cast<double>(pixdim[1])), std::abs(static_cast<double>(pixdim[2])),
          std::abs(static_cast<double>(pixdim[3]))};
}

Affine Header::affine(std::string* provenance) const {
  Affine a;
  if (sform_code > 0) {
    for (int c = 0; c < 4; ++c) {
      a.m[0][c] = srow_x[c];
      a.m[1][c] = srow_y[c];
      a.m[2][c] = srow_z[c];
    }
    if (provenance) {
      *provenance = "sform";
      if (qform_code > 0) *provenance += " (qform present, sform preferred)";
    }
    return a;
  }
  const Vec3 s = spacing();
  if (qform_code > 0) {
    double b = quatern_b, c = quatern_c, d = quatern_d;
    double aa = 1.0 - (b * b + c * c + d * d);
    if (aa < 1e-7) {
      aa = 1.0 / std::sqrt(b * b + c * c + d * d);
      b *= aa;
      c *= aa;
      d *= aa;
      aa = 0.0;
    } else {
      aa = std::sqrt(aa);
    }
    const double qfac = pixdim[0] < 0.0f ? -1.0 : 1.0;
    const double r[3][3] = {
        {aa * aa + b * b - c * c - d * d, 2 * (b * c - aa * d), 2 * (b * d + aa * c)},
        {2 * (b * c + aa * d), aa * aa + c * c - b * b - d * d, 2 * (c * d - aa * b)},
        {2 * (b * d - aa * c), 2 * (c * d + aa * b), aa * aa + d * d - c * c - b * b}};
    const double scale[3] = {s.x, s.y, s.z * qfac};
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) a.m[row][col] = r[row][col] * scale[col];
    }
    a.m[0][3] = qoffset_x;
    a.m[1][3] = qoffset_y;
    a.m[2][3] = qoffset_z;
    if (provenance) *provenance = "qform";
    return a;
  }
  if (provenance) *provenance = "pixdim";
  return Affine::scaling(s);
}

Header parse_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) fail(ErrorCode::MalformedHeader, "file shorter than header");

  Header h;
  const std::int32_t le_size = Reader(bytes, false).get<std::int32_t>(0);
  const std::int32_t be_size = Reader(bytes, true).get<std::int32_t>(0);
  bool swap = false;
  if (le_size == static_cast<std::int32_t>(kHeaderSize)) {
    swap = std::endian::native != std::endian::little;
    h.endianness = Endianness::Little;
  } else if (be_size == static_cast<std::int32_t>(kHeaderSize)) {
    swap = std::endian::native == std::endian::little;
    h.endianness = Endianness::Big;
  } else {
    fail(ErrorCode::MalformedHeader, "sizeof_hdr is not 348");
  }
  if (std::memcmp(bytes.data() + 344, kMagic, 4) != 0)
    fail(ErrorCode::MalformedHeader, "magic is not \"n+1\" (only single-file NIfTI-1)");

  const Reader r(bytes, swap);
  for (int i = 0; i < 8; ++i) h.dim[i] = r.get<std::int16_t>(40 + 2 * i);
  h.datatype = r.get<std::int16_t>(70);
  h.bitpix = r.get<std::int16_t>(72);
  for (int i = 0; i < 8; ++i) h.pixdim[i] = r.get<float>(76 + 4 * i);
  h.vox_offset = r.get<float>(108);
  h.scl_slope = r.get<float>(112);
  h.scl_inter = r.get<float>(116);
  h.xyzt_units = bytes[123];
  h.descrip = read_cstring(bytes, 148, 80);
  h.qform_code = r.get<std::int16_t>(252);
  h.sform_code = r.get<std::int16_t>(254);
  h.quatern_b = r.get<float>(256);
  h.quatern_c = r.get<float>(260);
  h.quatern_d = r.get<float>(264);
  h.qoffset_x = r.get<float>(268);
  h.qoffset_y = r.get<float>(272);
  h.qoffset_z = r.get<float>(276);
  for (int i = 0; i < 4; ++i) {
    h.srow_x[i] = r.get<float>(280 + 4 * i);
    h.srow_y[i] = r.get<float>(296 + 4 * i);
    h.srow_z[i] = r.get<float>(312 + 4 * i);
  }

  if (h.dim[0] < 1 || h.dim[0] > 7) fail(ErrorCode::MalformedHeader, "dim[0] out of range");
  for (int i = 1; i <= 3; ++i) {
    if (i <= h.dim[0] && h.dim[i] < 1) fail(ErrorCode::MalformedHeader, "non-positive dim");
    if (i > h.dim[0]) h.dim[i] = 1;
  }
  for (int i = 4; i <= h.dim[0]; ++i) {
    if (h.dim[i] > 1) fail(ErrorCode::MalformedHeader, "only 3D volumes are supported");
  }
  for (int i = 1; i <= 3; ++i) {
    if (i > h.dim[0] && h.pixdim[i] == 0.0f) h.pixdim[i] = 1.0f;
    if (!(std::abs(h.pixdim[i]) > 0.0f) || !std::isfinite(h.pixdim[i]))
      fail(ErrorCode::MalformedHeader, "non-positive pixdim");
  }
  if (!(h.vox_offset >= static_cast<float>(kMinVoxOffset)))
    fail(ErrorCode::MalformedHeader, "vox_offset below 352");
  if (h.datatype != kDatatypeInt16 && h.datatype != kDatatypeFloat32)
    fail(ErrorCode::UnsupportedDatatype,
         "datatype " + std::to_string(h.datatype) + " (supported: int16, float32)");
  return h;
}

Volume parse(std::span<const std::uint8_t> bytes) {
  std::vector<std::uint8_t> inflated;
  if (is_gzip(bytes)) {
    inflated = gunzip(bytes);
    bytes = inflated;
  }
  const Header h = parse_header(bytes);
  const bool swap = (h.endianness == Endianness::Big) == (std::endian::native == std::endian::little);

  Volume v;
  v.dims = h.dims();
  v.spacing = h.spacing();
  v.affine = h.affine(&v.provenance);
  v.value_kind = kind_from_descrip(h.descrip);

  const std::size_t n = v.voxel_count();
  const std::size_t width = h.datatype == kDatatypeInt16 ? 2 : 4;
  const auto offset = static_cast<std::size_t>(h.vox_offset);
  if (bytes.size() < offset || (bytes.size() - offset) / width < n)
    fail(ErrorCode::TruncatedData, "voxel data shorter than dims imply");

  const bool scale = h.scl_slope != 0.0f && std::isfinite(h.scl_slope);
  const double slope = h.scl_slope;
  const double inter = std::isfinite(h.scl_inter) ? h.scl_inter : 0.0;
  const Reader r(bytes, swap);
  v.voxels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double raw = h.datatype == kDatatypeInt16
                           ? static_cast<double>(r.get<std::int16_t>(offset + 2 * i))
                           : static_cast<double>(r.get<float>(offset + 4 * i));
    v.voxels[i] = static_cast<float>(scale ? slope * raw + inter : raw);
  }
  return v;
}

std::vector<std::uint8_t> serialize(const Volume& volume) {
  volume.validate();
  std::vector<std::uint8_t> out(kMinVoxOffset + 4 * volume.voxel_count(), 0);
  Writer w(out);
  w.put<std::int32_t>(0, static_cast<std::int32_t>(kHeaderSize));
  out[39] = 0;  // dim_info
  w.put<std::int16_t>(40, 3);
  for (int i = 0; i < 3; ++i) w.put<std::int16_t>(42 + 2 * i, static_cast<std::int16_t>(volume.dims[i]));
  for (int i = 3; i < 7; ++i) w.put<std::int16_t>(42 + 2 * i, 1);
  w.put<std::int16_t>(70, kDatatypeFloat32);
  w.put<std::int16_t>(72, 32);
  w.put<float>(76, 1.0f);
  for (int i = 0; i < 3; ++i) w.put<float>(80 + 4 * i, static_cast<float>(volume.spacing[i]));
  w.put<float>(108, static_cast<float>(kMinVoxOffset));
  w.put<float>(112, 1.0f);
  w.put<float>(116, 0.0f);
  out[123] = 2;  // NIFTI_UNITS_MM
  const std::string descrip = std::string(kKindTag) + to_string(volume.value_kind);
  std::memcpy(out.data() + 148, descrip.data(), descrip.size());
  w.put<std::int16_t>(252, 0);
  w.put<std::int16_t>(254, 2);  // NIFTI_XFORM_ALIGNED_ANAT
  for (int c = 0; c < 4; ++c) {
    w.put<float>(280 + 4 * c, static_cast<float>(volume.affine.m[0][c]));
    w.put<float>(296 + 4 * c, static_cast<float>(volume.affine.m[1][c]));
    w.put<float>(312 + 4 * c, static_cast<float>(volume.affine.m[2][c]));
  }
  std::memcpy(out.data() + 344, kMagic, 4);
  // Bytes 348..351: extension flag, left zero.
  for (std::size_t i = 0; i < volume.voxels.size(); ++i) {
    w.put<float>(kMinVoxOffset + 4 * i, volume.voxels[i]);
  }
  return out;
}

Header read_header(const std::filesystem::path& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) fail(ErrorCode::IoFailure, "cannot open " + path.string());
  std::vector<std::uint8_t> buf(kHeaderSize);
  const int got = gzread(f, buf.data(), static_cast<unsigned>(buf.size()));
  gzclose(f);
  if (got < 0) fail(ErrorCode::IoFailure, "read error on " + path.string());
  buf.resize(static_cast<std::size_t>(got));
  return parse_header(buf);
}

Volume read(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return parse(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void write(const Volume& volume, const std::filesystem::path& path) {
  auto bytes = serialize(volume);
  if (path.extension() == ".gz") bytes = gzip(bytes);
  write_file_bytes(path, bytes);
}

}  // namespace lungbeam::nifti
