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

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lungbeam/consensus.hpp"
#include "lungbeam/csv.hpp"
#include "lungbeam/dataset.hpp"
#include "lungbeam/error.hpp"
#include "lungbeam/metrics.hpp"
#include "lungbeam/nifti.hpp"
#include "lungbeam/preprocess.hpp"
#include "lungbeam/renderer.hpp"
#include "lungbeam/service.hpp"

namespace fs = std::filesystem;
using namespace lungbeam;

namespace {

constexpr std::uint64_t kDefaultSeed = 20210;

void require_file(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) fail(ErrorCode::IoFailure, "no such file: " + path.string());
}

void write_text(const fs::path& path, const std::string& text) {
  write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::set<Plane> parse_planes(const std::string& text) {
  std::set<Plane> planes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const Plane p = parse_plane(item);
    if (p == Plane::Sagittal) fail(ErrorCode::SagittalRequested, "the sagittal plane is not part of the protocol");
    planes.insert(p);
  }
  if (planes.empty()) fail(ErrorCode::Usage, "--planes needs at least one of axial,coronal");
  return planes;
}

void check_resolution(int px) {
  if (px < kPreviewMinPx) fail(ErrorCode::Usage, "--resolution must be at least 64");
}

void check_step(double step) {
  if (!(step > 0.0) || step > 10.0) fail(ErrorCode::Usage, "--step-mm must lie in (0, 10]");
}

struct PreprocessArgs {
  std::string ct, prob, out_dir;
  double spacing = 1.0;
  double threshold = kLungProbabilityThreshold;
};

int cmd_preprocess(const PreprocessArgs& a) {
  require_file(a.ct);
  require_file(a.prob);
  const Volume ct = read_nifti(a.ct);
  Volume prob = read_nifti(a.prob);
  prob.value_kind = ValueKind::Probability;
  const PreprocessResult r = preprocess_pair(ct, prob, a.spacing, a.threshold);
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create " + a.out_dir);
  write_nifti(r.masked_hu, fs::path(a.out_dir) / "masked.nii.gz");
  write_nifti(mask_to_volume(r.mask), fs::path(a.out_dir) / "mask.nii.gz");
  std::printf("dims %dx%dx%d, %zu lung voxels\n", r.masked_hu.dims[0], r.masked_hu.dims[1], r.masked_hu.dims[2],
              r.mask.count_set());
  return 0;
}

struct RenderArgs {
  std::string volume, view, out, tf = "TF6";
  int resolution = kDefaultImagePx;
  double step_mm = kDefaultStepMm;
  unsigned threads = 0;
};

int cmd_render(const RenderArgs& a) {
  const ViewSpec spec = parse_view(a.view);
  check_resolution(a.resolution);
  check_step(a.step_mm);
  require_file(a.volume);
  const TransferFunction tf = resolve_tf(a.tf);
  const Volume volume = read_nifti(a.volume);
  const MaskGeometry geometry = mask_geometry(mask_from_foreground(volume));
  const Camera cam = camera_pose(spec.plane, spec.sweep_axis, spec.angle_deg, geometry, a.resolution);
  RenderOptions ropts;
  ropts.step_mm = a.step_mm;
  ropts.threads = a.threads;
  write_png(render(volume, tf, cam, ropts), a.out);
  return 0;
}

struct DatasetArgs {
  std::string listing, out_dir, tf = "TF6", planes = "axial,coronal";
  int resolution = kDefaultImagePx;
  double step_mm = kDefaultStepMm;
  unsigned jobs = 1;
  int augment = 0;
  std::uint64_t seed = kDefaultSeed;
};

int cmd_dataset(const DatasetArgs& a) {
  GenerationOptions opts;
  opts.planes = parse_planes(a.planes);
  check_resolution(a.resolution);
  check_step(a.step_mm);
  opts.resolution = a.resolution;
  opts.step_mm = a.step_mm;
  if (a.augment < 0) fail(ErrorCode::Usage, "--augment must be non-negative");
  require_file(a.listing);
  const TransferFunction tf = resolve_tf(a.tf);
  const auto records = read_listing(a.listing);
  std::printf("seed %llu\n", static_cast<unsigned long long>(a.seed));

  const DatasetResult result = generate_dataset(records, tf, a.out_dir, opts, std::max(1u, a.jobs));
  write_manifest(result.rows, fs::path(a.out_dir) / "manifest.csv");
  if (a.augment > 0) {
    std::string text = std::string(kAugmentedManifestHeader) + "\n";
    for (const auto& line : materialize_augmentations(result.rows, a.out_dir, a.augment, a.seed)) text += line + "\n";
    write_text(fs::path(a.out_dir) / "augmented" / "manifest.csv", text);
  }
  std::printf("%zu patients, %zu images\n", records.size() - result.failures.size(), result.rows.size());
  for (const auto& f : result.failures) std::fprintf(stderr, "error: %s\n", f.message.c_str());
  return result.failures.empty() ? 0 : result.failures.front().exit_code;
}

int cmd_consensus(const std::string& scores, const std::string& out, bool strict, int batch) {
  require_file(scores);
  if (batch < 1) fail(ErrorCode::Usage, "--batch-size must be positive");
  const ScoreTable table = read_scores(scores);
  ConsensusOptions opts;
  opts.strict_batch = strict;
  opts.batch_size = batch;
  const auto results = aggregate_all(table, opts);
  write_text(out, consensus_csv(results, table.scheme));
  for (const auto& r : results) std::printf("%s %s\n", r.patient_id.c_str(), class_names(table.scheme)[r.predicted].c_str());
  return 0;
}

int cmd_evaluate(const std::string& pred_path, const std::string& truth_path, const std::string& out_dir) {
  require_file(pred_path);
  require_file(truth_path);
  const PredictionTable pred = read_predictions(pred_path);
  const csv::Table truth_table = csv::read(truth_path);
  const int c_id = truth_table.require("patient_id", truth_path);
  const int c_label = truth_table.require("label", truth_path);
  std::map<std::string, int> truth_of;
  for (const auto& row : truth_table.rows) {
    const std::string where = truth_path + ":" + std::to_string(row.line);
    const auto cls = try_parse_class(pred.scheme, row.fields[c_label]);
    if (!cls) fail(ErrorCode::UnknownClass, where + ": unknown class '" + row.fields[c_label] + "'");
    if (!truth_of.emplace(row.fields[c_id], *cls).second)
      fail(ErrorCode::DuplicatePatient, where + ": duplicate patient '" + row.fields[c_id] + "'");
  }

  std::vector<int> truth;
  std::vector<std::vector<double>> scores;
  for (std::size_t i = 0; i < pred.patient_ids.size(); ++i) {
    const auto it = truth_of.find(pred.patient_ids[i]);
    if (it == truth_of.end()) fail(ErrorCode::MalformedCsv, "no label for patient '" + pred.patient_ids[i] + "'");
    truth.push_back(it->second);
    ConsensusResult r;
    r.votes_per_class = pred.votes[i];
    scores.push_back(consensus_distribution(r));
  }
  const auto report = metrics::evaluate(pred.predicted, truth, scores, class_names(pred.scheme));
  metrics::write_report(report, class_keys(pred.scheme), out_dir);
  std::fputs(metrics::text_table(report).c_str(), stdout);
  return 0;
}

int cmd_overlay(const std::string& image, const std::vector<std::string>& maps, const std::string& out, double blend) {
  require_file(image);
  std::vector<ActivationMap> loaded;
  for (const auto& m : maps) {
    require_file(m);
    loaded.push_back(load_activation_csv(m));
  }
  write_png(overlay_heatmap(read_png(image), mean_activation(loaded), blend), out);
  return 0;
}

int cmd_export_presets(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create " + dir);
  for (Preset p : kAllPresets) save_tf_file(builtin_preset(p), fs::path(dir) / (preset_name(p) + ".json"));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Volume-rendered CT dataset generation, consensus voting and evaluation."};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  PreprocessArgs pre;
  auto* sc_pre = app.add_subcommand("preprocess", "Resample, threshold and mask a CT/lung-probability pair");
  sc_pre->add_option("ct", pre.ct, "CT volume in HU (NIfTI)")->required();
  sc_pre->add_option("probability", pre.prob, "Lung probability volume (NIfTI)")->required();
  sc_pre->add_option("out_dir", pre.out_dir, "Writes masked.nii.gz and mask.nii.gz here")->required();
  sc_pre->add_option("--spacing", pre.spacing, "Isotropic target spacing in mm")->capture_default_str();
  sc_pre->add_option("--threshold", pre.threshold, "Probability threshold (inclusive)")->capture_default_str();

  RenderArgs ren;
  auto* sc_ren = app.add_subcommand("render", "Render one protocol view of a masked volume");
  sc_ren->add_option("volume", ren.volume, "Masked isotropic HU volume (NIfTI)")->required();
  sc_ren->add_option("view", ren.view, "plane:axis:index, e.g. axial:h:10")->required();
  sc_ren->add_option("out", ren.out, "Output PNG")->required();
  sc_ren->add_option("--tf", ren.tf, "Preset TF1..TF6 or a TF document")->capture_default_str();
  sc_ren->add_option("--resolution", ren.resolution, "Image size in pixels")->capture_default_str();
  sc_ren->add_option("--step-mm", ren.step_mm, "Ray step in mm")->capture_default_str();
  sc_ren->add_option("--threads", ren.threads, "Render threads (0: all cores)")->capture_default_str();

  DatasetArgs ds;
  auto* sc_ds = app.add_subcommand("dataset", "Generate the 84-view image set for every patient of a listing");
  sc_ds->add_option("listing", ds.listing, "CSV patient_id,label,ct_path,mask_path")->required();
  sc_ds->add_option("out_dir", ds.out_dir, "Output directory (PNGs + manifest.csv)")->required();
  sc_ds->add_option("--tf", ds.tf, "Preset TF1..TF6 or a TF document")->capture_default_str();
  sc_ds->add_option("--planes", ds.planes, "Comma-separated planes")->capture_default_str();
  sc_ds->add_option("--resolution", ds.resolution, "Image size in pixels")->capture_default_str();
  sc_ds->add_option("--step-mm", ds.step_mm, "Ray step in mm")->capture_default_str();
  sc_ds->add_option("--jobs", ds.jobs, "Parallel patients")->capture_default_str();
  sc_ds->add_option("--augment", ds.augment, "Augmented copies per image")->capture_default_str();
  sc_ds->add_option("--seed", ds.seed, "Augmentation seed")->capture_default_str();

  std::string scores_path, consensus_out;
  bool strict = true;
  int batch = kViewsPerPlane;
  auto* sc_con = app.add_subcommand("consensus", "Patient-level prediction from per-image scores");
  sc_con->add_option("scores", scores_path, "CSV patient_id,plane,view_index,score_<class>...")->required();
  sc_con->add_option("out", consensus_out, "Output CSV")->required();
  sc_con->add_flag("--strict-batch,!--no-strict-batch", strict, "Require full per-plane batches")
      ->capture_default_str();
  sc_con->add_option("--batch-size", batch, "Views per plane")->capture_default_str();

  std::string pred_path, truth_path, eval_out;
  auto* sc_eval = app.add_subcommand("evaluate", "Metrics report for consensus predictions");
  sc_eval->add_option("predictions", pred_path, "Consensus output CSV")->required();
  sc_eval->add_option("truth", truth_path, "CSV with patient_id,label")->required();
  sc_eval->add_option("out_dir", eval_out, "Report directory")->required();

  ServiceConfig svc;
  std::string addr = "127.0.0.1:8080";
  auto* sc_srv = app.add_subcommand("serve", "Preview HTTP service");
  sc_srv->add_option("--addr", addr, "host:port to bind")->capture_default_str();
  sc_srv->add_option("--volumes-dir", svc.volumes_dir, "Directory of masked NIfTI volumes")->required();
  sc_srv->add_option("--tf-dir", svc.tf_dir, "Stored transfer functions")->capture_default_str();
  sc_srv->add_option("--cache-size", svc.cache_size, "Volumes kept in memory")->capture_default_str();

  std::string ov_image, ov_out;
  std::vector<std::string> ov_maps;
  double blend = 0.4;
  auto* sc_ov = app.add_subcommand("overlay", "Blend mean activation maps over a rendered view");
  sc_ov->add_option("image", ov_image, "Rendered PNG")->required();
  sc_ov->add_option("out", ov_out, "Output PNG")->required();
  sc_ov->add_option("--map", ov_maps, "Activation CSV (repeatable, averaged)")->required();
  sc_ov->add_option("--blend", blend, "Heatmap weight in [0,1]")->capture_default_str();

  std::string export_dir;
  auto* sc_exp = app.add_subcommand("export-presets", "Write the built-in presets as TF documents");
  sc_exp->add_option("dir", export_dir, "Target directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code_for(ErrorCode::Usage);
  }

  try {
    if (*sc_pre) return cmd_preprocess(pre);
    if (*sc_ren) return cmd_render(ren);
    if (*sc_ds) return cmd_dataset(ds);
    if (*sc_con) return cmd_consensus(scores_path, consensus_out, strict, batch);
    if (*sc_eval) return cmd_evaluate(pred_path, truth_path, eval_out);
    if (*sc_ov) return cmd_overlay(ov_image, ov_maps, ov_out, blend);
    if (*sc_exp) return cmd_export_presets(export_dir);
    if (*sc_srv) {
      PreviewService service(svc);
      std::fprintf(stderr, "listening on %s\n", addr.c_str());
      serve(service, addr);
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
