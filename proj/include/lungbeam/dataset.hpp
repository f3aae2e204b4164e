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
#include <set>
#include <string>
#include <vector>

#include "lungbeam/camera.hpp"
#include "lungbeam/image.hpp"
#include "lungbeam/transfer_function.hpp"

namespace lungbeam {

struct PatientRecord {
  std::string patient_id;
  std::optional<std::string> label;
  std::filesystem::path ct_path;
  std::filesystem::path mask_path;
};

// CSV `patient_id,label,ct_path,mask_path`. Relative paths resolve against
// the listing's directory. Throws DuplicatePatient or MalformedCsv (mixed
// labeled/unlabeled rows).
std::vector<PatientRecord> read_listing(const std::filesystem::path& path);

inline constexpr const char* kManifestHeader =
    "patient_id,label,plane,sweep_axis,angle_deg,view_index,tf_name,file";

struct ManifestRow {
  std::string patient_id;
  std::string label;
  Plane plane = Plane::Axial;
  SweepAxis sweep_axis = SweepAxis::Horizontal;
  double angle_deg = 0.0;
  int view_index = 0;
  std::string tf_name;
  std::string file;  // relative to the output directory

  friend bool operator==(const ManifestRow&, const ManifestRow&) = default;
};

std::string format_angle(double angle_deg);
std::string manifest_line(const ManifestRow& row);
void write_manifest(const std::vector<ManifestRow>& rows, const std::filesystem::path& path);
std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);

// "{patient_id}_{plane}_{axis}_{index:02}.png"
std::string view_filename(const std::string& patient_id, const ViewSpec& spec);

struct GenerationOptions {
  std::set<Plane> planes{Plane::Axial, Plane::Coronal};
  int resolution = kDefaultImagePx;
  double step_mm = 0.5;
  unsigned render_threads = 0;
};

// preprocess -> camera -> render for every protocol view; writes the PNGs
// into out_dir and returns one manifest row per image. Errors carry the
// patient id.
std::vector<ManifestRow> generate_patient_views(const PatientRecord& record, const TransferFunction& tf,
                                                const std::filesystem::path& out_dir,
                                                const GenerationOptions& options = {});

struct PatientFailure {
  std::string patient_id;
  std::string message;
  int exit_code = 1;
};

struct DatasetResult {
  std::vector<ManifestRow> rows;  // listing order, then view order
  std::vector<PatientFailure> failures;
};

// Patients run on `jobs` workers; output is identical for any job count.
DatasetResult generate_dataset(const std::vector<PatientRecord>& records, const TransferFunction& tf,
                               const std::filesystem::path& out_dir, const GenerationOptions& options,
                               unsigned jobs);

// Training-time image augmentation.
struct AugmentationParams {
  double rotation_deg = 0.0;  // [-15, 15]
  double zoom = 1.0;          // [0.95, 1.05]
  double shift_x = 0.0;       // [-0.10, 0.10] of the width
  double shift_y = 0.0;       // [-0.10, 0.10] of the height
  // Consumers divide pixel values by 255; stored files stay 8-bit.
  bool rescale = true;

  // Throws ParamsOutOfRange.
  void validate() const;
  friend bool operator==(const AugmentationParams&, const AugmentationParams&) = default;
};

inline constexpr double kMaxRotationDeg = 15.0;
inline constexpr double kMaxZoomDelta = 0.05;
inline constexpr double kMaxShift = 0.10;
inline constexpr double kRescaleFactor = 1.0 / 255.0;

// Rotate about the image center, zoom about the center, then shift; bilinear
// resampling with opaque black fill. The transform is fully determined by
// `params`; `seed` is carried for provenance.
Image augment(const Image& image, const AugmentationParams& params, std::uint64_t seed);

// Uniform draws inside every bound; reproducible for a fixed seed.
std::vector<AugmentationParams> sample_augmentations(std::size_t count, std::uint64_t seed);

inline constexpr const char* kAugmentedManifestHeader =
    "patient_id,label,source_file,file,rotation_deg,zoom,shift_x,shift_y,seed";

// Writes `copies` augmented variants of every row's image under
// out_dir/augmented and returns the augmented manifest lines (no header).
std::vector<std::string> materialize_augmentations(const std::vector<ManifestRow>& rows,
                                                   const std::filesystem::path& out_dir, int copies,
                                                   std::uint64_t seed);

}  // namespace lungbeam
