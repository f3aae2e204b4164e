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

#include "lungbeam/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <thread>
#include <unordered_set>

#include "lungbeam/csv.hpp"
#include "lungbeam/error.hpp"
#include "lungbeam/nifti.hpp"
#include "lungbeam/preprocess.hpp"
#include "lungbeam/renderer.hpp"

namespace lungbeam {
namespace fs = std::filesystem;

std::vector<PatientRecord> read_listing(const fs::path& path) {
  const csv::Table table = csv::read(path);
  const std::string src = path.string();
  const int c_id = table.require("patient_id", src);
  const int c_label = table.require("label", src);
  const int c_ct = table.require("ct_path", src);
  const int c_mask = table.require("mask_path", src);
  const fs::path base = path.parent_path();

  std::vector<PatientRecord> records;
  std::unordered_set<std::string> seen;
  std::optional<bool> labeled;
  for (const auto& row : table.rows) {
    const std::string where = src + ":" + std::to_string(row.line);
    PatientRecord r;
    r.patient_id = row.fields[c_id];
    if (r.patient_id.empty()) fail(ErrorCode::MalformedCsv, where + ": empty patient_id");
    if (r.patient_id.find_first_of("/\\") != std::string::npos)
      fail(ErrorCode::MalformedCsv, where + ": patient_id must not contain path separators");
    if (!seen.insert(r.patient_id).second)
      fail(ErrorCode::DuplicatePatient, where + ": duplicate patient_id '" + r.patient_id + "'");
    const bool has_label = !row.fields[c_label].empty();
    if (labeled && *labeled != has_label)
      fail(ErrorCode::MalformedCsv, where + ": labels must be present on all rows or on none");
    labeled = has_label;
    if (has_label) r.label = row.fields[c_label];
    r.ct_path = row.fields[c_ct];
    r.mask_path = row.fields[c_mask];
    if (r.ct_path.is_relative()) r.ct_path = base / r.ct_path;
    if (r.mask_path.is_relative()) r.mask_path = base / r.mask_path;
    records.push_back(std::move(r));
  }
  return records;
}

std::string format_angle(double angle_deg) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", angle_deg);
  return std::string(buf) == "-0.0" ? "0.0" : buf;
}

std::string manifest_line(const ManifestRow& row) {
  return csv::join({row.patient_id, row.label, to_string(row.plane), to_string(row.sweep_axis),
                    format_angle(row.angle_deg), std::to_string(row.view_index), row.tf_name, row.file});
}

void write_manifest(const std::vector<ManifestRow>& rows, const fs::path& path) {
  std::string text = std::string(kManifestHeader) + "\n";
  for (const auto& row : rows) text += manifest_line(row) + "\n";
  write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::vector<ManifestRow> read_manifest(const fs::path& path) {
  const csv::Table table = csv::read(path);
  const std::string src = path.string();
  if (csv::join(table.header) != kManifestHeader)
    fail(ErrorCode::MalformedCsv, src + ":1: unexpected manifest header");
  std::vector<ManifestRow> rows;
  for (const auto& r : table.rows) {
    const std::string where = src + ":" + std::to_string(r.line);
    ManifestRow m;
    m.patient_id = r.fields[0];
    m.label = r.fields[1];
    m.plane = parse_plane(r.fields[2]);
    m.sweep_axis = parse_sweep_axis(r.fields[3]);
    m.angle_deg = csv::parse_double(r.fields[4], where);
    m.view_index = static_cast<int>(csv::parse_int(r.fields[5], where));
    m.tf_name = r.fields[6];
    m.file = r.fields[7];
    rows.push_back(std::move(m));
  }
  return rows;
}

std::string view_filename(const std::string& patient_id, const ViewSpec& spec) {
  char idx[8];
  std::snprintf(idx, sizeof idx, "%02d", spec.index);
  return patient_id + "_" + to_string(spec.plane) + "_" + to_string(spec.sweep_axis) + "_" + idx + ".png";
}

std::vector<ManifestRow> generate_patient_views(const PatientRecord& record, const TransferFunction& tf,
                                                const fs::path& out_dir, const GenerationOptions& options) {
  try {
    const auto specs = build_view_specs(options.planes);
    const Volume ct = read_nifti(record.ct_path);
    Volume probability = read_nifti(record.mask_path);
    probability.value_kind = ValueKind::Probability;
    const PreprocessResult prep = preprocess_pair(ct, probability);
    const MaskGeometry geometry = mask_geometry(prep.mask);

    RenderOptions ropts;
    ropts.step_mm = options.step_mm;
    ropts.threads = options.render_threads;

    std::vector<ManifestRow> rows;
    rows.reserve(specs.size());
    for (const ViewSpec& spec : specs) {
      const Camera cam = camera_pose(spec.plane, spec.sweep_axis, spec.angle_deg, geometry, options.resolution);
      Image img = render(prep.masked_hu, tf, cam, ropts);
      img.meta.view = spec;
      img.meta.patient_id = record.patient_id;
      const std::string file = view_filename(record.patient_id, spec);
      write_png(img, out_dir / file);
      rows.push_back({record.patient_id, record.label.value_or(""), spec.plane, spec.sweep_axis,
                      spec.angle_deg, spec.index, tf.name, file});
    }
    return rows;
  } catch (const Error& e) {
    throw Error(e.code(), "patient '" + record.patient_id + "': " + e.detail());
  }
}

DatasetResult generate_dataset(const std::vector<PatientRecord>& records, const TransferFunction& tf,
                               const fs::path& out_dir, const GenerationOptions& options, unsigned jobs) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create " + out_dir.string());

  struct Slot {
    std::vector<ManifestRow> rows;
    std::optional<PatientFailure> failure;
  };
  std::vector<Slot> slots(records.size());
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(records.size(), 1))));
  GenerationOptions per_job = options;
  if (per_job.render_threads == 0) {
    per_job.render_threads = std::max(1u, std::thread::hardware_concurrency() / jobs);
  }

  auto run = [&](std::size_t i) {
    try {
      slots[i].rows = generate_patient_views(records[i], tf, out_dir, per_job);
    } catch (const Error& e) {
      slots[i].failure = PatientFailure{records[i].patient_id, e.what(), exit_code_for(e.code())};
    } catch (const std::exception& e) {
      slots[i].failure = PatientFailure{records[i].patient_id, e.what(), 1};
    }
  };

  if (jobs == 1) {
    for (std::size_t i = 0; i < records.size(); ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < jobs; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < records.size(); i = next++) run(i);
      });
    }
  }

  DatasetResult result;
  for (auto& slot : slots) {
    if (slot.failure) {
      result.failures.push_back(*slot.failure);
    } else {
      result.rows.insert(result.rows.end(), slot.rows.begin(), slot.rows.end());
    }
  }
  return result;
}

void AugmentationParams::validate() const {
  auto check = [](double v, double lo, double hi, const char* name) {
    if (!(v >= lo && v <= hi))
      fail(ErrorCode::ParamsOutOfRange, std::string(name) + " " + std::to_string(v) + " outside [" +
                                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
  };
  check(rotation_deg, -kMaxRotationDeg, kMaxRotationDeg, "rotation_deg");
  check(zoom, 1.0 - kMaxZoomDelta, 1.0 + kMaxZoomDelta, "zoom");
  check(shift_x, -kMaxShift, kMaxShift, "shift_x");
  check(shift_y, -kMaxShift, kMaxShift, "shift_y");
}

Image augment(const Image& image, const AugmentationParams& params, std::uint64_t /*seed*/) {
  params.validate();
  Image out(image.width, image.height);
  out.meta = image.meta;
  const double cx = image.width / 2.0;
  const double cy = image.height / 2.0;
  const double rad = params.rotation_deg * std::numbers::pi / 180.0;
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  const double dx = params.shift_x * image.width;
  const double dy = params.shift_y * image.height;

  auto channel = [&](int x, int y, int ch) -> double {
    if (x < 0 || y < 0 || x >= image.width || y >= image.height) return ch == 3 ? 255.0 : 0.0;
    return image.pixel(x, y)[ch];
  };

  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      // Inverse map of the output pixel center into the source image.
      const double qx = (x + 0.5 - cx - dx) / params.zoom;
      const double qy = (y + 0.5 - cy - dy) / params.zoom;
      const double sx = cx + c * qx + s * qy - 0.5;
      const double sy = cy - s * qx + c * qy - 0.5;
      std::uint8_t* p = out.pixel(x, y);
      if (sx < -1.0 || sy < -1.0 || sx > image.width || sy > image.height) continue;
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const double wx = sx - x0;
      const double wy = sy - y0;
      for (int ch = 0; ch < 3; ++ch) {
        const double top = channel(x0, y0, ch) + wx * (channel(x0 + 1, y0, ch) - channel(x0, y0, ch));
        const double bottom =
            channel(x0, y0 + 1, ch) + wx * (channel(x0 + 1, y0 + 1, ch) - channel(x0, y0 + 1, ch));
        p[ch] = static_cast<std::uint8_t>(std::clamp(std::round(top + wy * (bottom - top)), 0.0, 255.0));
      }
      p[3] = 255;
    }
  }
  return out;
}

std::vector<AugmentationParams> sample_augmentations(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> rotation(-kMaxRotationDeg, kMaxRotationDeg);
  std::uniform_real_distribution<double> zoom(1.0 - kMaxZoomDelta, 1.0 + kMaxZoomDelta);
  std::uniform_real_distribution<double> shift(-kMaxShift, kMaxShift);
  std::vector<AugmentationParams> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    AugmentationParams p;
    p.rotation_deg = rotation(rng);
    p.zoom = zoom(rng);
    p.shift_x = shift(rng);
    p.shift_y = shift(rng);
    out.push_back(p);
  }
  return out;
}

std::vector<std::string> materialize_augmentations(const std::vector<ManifestRow>& rows, const fs::path& out_dir,
                                                   int copies, std::uint64_t seed) {
  std::vector<std::string> lines;
  if (copies <= 0) return lines;
  const fs::path aug_dir = out_dir / "augmented";
  std::error_code ec;
  fs::create_directories(aug_dir, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create " + aug_dir.string());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Image source = read_png(out_dir / rows[r].file);
    // Per-image seed derived from the run seed and the row position.
    const std::uint64_t image_seed = std::mt19937_64(seed ^ (0x9e3779b97f4a7c15ULL * (r + 1)))();
    const auto params = sample_augmentations(static_cast<std::size_t>(copies), image_seed);
    const std::string stem = fs::path(rows[r].file).stem().string();
    for (int k = 0; k < copies; ++k) {
      char suffix[24];
      std::snprintf(suffix, sizeof suffix, "_aug%02d.png", k);
      const std::string file = "augmented/" + stem + suffix;
      write_png(augment(source, params[k], image_seed), out_dir / file);
      char numbers[128];
      std::snprintf(numbers, sizeof numbers, "%.6f,%.6f,%.6f,%.6f", params[k].rotation_deg, params[k].zoom,
                    params[k].shift_x, params[k].shift_y);
      lines.push_back(csv::join({rows[r].patient_id, rows[r].label, rows[r].file, file}) + "," + numbers +
                      "," + std::to_string(image_seed));
    }
  }
  return lines;
}

}  // namespace lungbeam
