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

// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "lungbeam/consensus.hpp"
#include "lungbeam/dataset.hpp"
#include "lungbeam/metrics.hpp"
#include "lungbeam/nifti.hpp"
#include "lungbeam/preprocess.hpp"
#include "lungbeam/renderer.hpp"
#include "lungbeam/service.hpp"
#include "phantom.hpp"

using namespace lungbeam;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few failures of a criterion.
class Tally {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (++failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  Outcome done(const std::string& summary) const {
    if (failures_ == 0) return {true, summary};
    return {false, summary + " | " + std::to_string(failures_) + " failed: " + notes_};
  }

 private:
  int failures_ = 0;
  std::string notes_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("'") + LUNGBEAM_CLI + "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// Width and height straight from the PNG signature + IHDR chunk.
std::pair<std::uint32_t, std::uint32_t> png_size(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  unsigned char b[24] = {};
  in.read(reinterpret_cast<char*>(b), 24);
  static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (!in || std::memcmp(b, sig, 8) != 0 || std::memcmp(b + 12, "IHDR", 4) != 0) return {0, 0};
  auto be32 = [&](int o) { return (std::uint32_t(b[o]) << 24) | (b[o + 1] << 16) | (b[o + 2] << 8) | b[o + 3]; };
  return {be32(16), be32(20)};
}

std::vector<std::uint8_t> bytes_of(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------------------

Outcome view_protocol() {
  Tally t;
  const auto dir = testing::scratch_dir("acc_protocol");
  const auto files = testing::write_patient(dir, "PH", 64);
  std::ofstream(dir / "list.csv") << "patient_id,label,ct_path,mask_path\nPH,COVID19," << files.ct.string() << ","
                                  << files.mask.string() << "\n";

  const auto t0 = std::chrono::steady_clock::now();
  const int code = run_cli("dataset " + q(dir / "list.csv") + " " + q(dir / "out"));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  t.expect(code == 0, "exit code " + std::to_string(code));
  t.expect(secs < 60.0, "took " + fmt("%.1f", secs) + " s");

  const auto rows = read_manifest(dir / "out" / "manifest.csv");
  t.expect(rows.size() == 84, std::to_string(rows.size()) + " manifest rows");
  std::map<std::pair<Plane, SweepAxis>, std::vector<double>> angles;
  std::map<Plane, int> per_plane;
  for (const auto& r : rows) {
    angles[{r.plane, r.sweep_axis}].push_back(r.angle_deg);
    ++per_plane[r.plane];
    const auto [w, h] = png_size(dir / "out" / r.file);
    t.expect(w == 448 && h == 448, r.file + " is " + std::to_string(w) + "x" + std::to_string(h));
  }
  t.expect(per_plane[Plane::Axial] == 42 && per_plane[Plane::Coronal] == 42 && per_plane.size() == 2,
           "images per plane");
  t.expect(angles.size() == 4, "four sweeps");
  for (auto& [key, list] : angles) {
    std::sort(list.begin(), list.end());
    t.expect(list.size() == 21, "21 angles per sweep");
    for (std::size_t i = 0; i < list.size(); ++i) {
      // Integer tenths of a degree: -120, -108, ..., 120.
      const long tenths = std::lround(list[i] * 10.0);
      t.expect(tenths == -120 + 12 * static_cast<long>(i) && std::abs(list[i] * 10.0 - tenths) < 1e-9,
               "angle " + fmt("%.4f", list[i]));
    }
  }
  std::size_t pngs = 0;
  for (const auto& e : fs::directory_iterator(dir / "out")) pngs += e.path().extension() == ".png";
  t.expect(pngs == 84, std::to_string(pngs) + " png files");
  return t.done("84 views at 448x448 in " + fmt("%.1f", secs) + " s");
}

Outcome worked_consensus() {
  Tally t;
  auto batch = [](Plane plane, std::array<int, 3> counts) {
    std::vector<ViewScores> rows;
    int view = 0;
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < counts[c]; ++k) {
        ViewScores s{"F1F", plane, view++, {0.1, 0.1, 0.1}};
        s.scores[c] = 0.8;
        rows.push_back(s);
      }
    return rows;
  };
  auto rows = batch(Plane::Axial, {6, 21, 15});
  const auto coronal = batch(Plane::Coronal, {36, 3, 3});
  rows.insert(rows.end(), coronal.begin(), coronal.end());
  const ConsensusResult r = aggregate(rows, ClassScheme::Ternary);
  t.expect(r.votes_per_class == std::vector<int>{42, 24, 18}, "totals");
  t.expect(class_names(ClassScheme::Ternary)[r.predicted] == "COVID19", "prediction");
  return t.done("(6,21,15)+(36,3,3) -> (" + std::to_string(r.votes_per_class[0]) + "," +
                std::to_string(r.votes_per_class[1]) + "," + std::to_string(r.votes_per_class[2]) + ") " +
                class_names(ClassScheme::Ternary)[r.predicted]);
}

Outcome compositing() {
  Tally t;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> len(0, 80);
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<Rgba> s(static_cast<std::size_t>(len(rng)));
    for (auto& x : s) x = {u(rng), u(rng), u(rng), u(rng)};
    const Rgba f = composite_front_to_back(s);
    Rgba b;
    for (auto it = s.rbegin(); it != s.rend(); ++it) {
      b.r = it->a * it->r + (1 - it->a) * b.r;
      b.g = it->a * it->g + (1 - it->a) * b.g;
      b.b = it->a * it->b + (1 - it->a) * b.b;
      b.a = it->a + (1 - it->a) * b.a;
    }
    worst = std::max({worst, std::abs(f.r - b.r), std::abs(f.g - b.g), std::abs(f.b - b.b), std::abs(f.a - b.a)});
  }
  t.expect(worst <= 1e-6, "over mismatch " + fmt("%.3g", worst));

  double slab = 0.0;
  for (double alpha : {0.002, 0.03, 0.25, 0.7})
    for (int n : {1, 10, 100, 1000}) {
      const Rgba acc = composite_front_to_back(std::vector<Rgba>(n, Rgba{0.5, 0.5, 0.5, alpha}));
      slab = std::max(slab, std::abs(acc.a - (1.0 - std::pow(1.0 - alpha, n))));
    }

  // The same through the ray caster: a 32 mm homogeneous cube.
  const Volume cube = make_volume({32, 32, 32}, {1, 1, 1}, -600.0f);
  const Camera cam = camera_pose(Plane::Coronal, SweepAxis::Horizontal, 0.0, mask_geometry(mask_from_foreground(cube)), 64);
  for (double alpha : {0.01, 0.08})
    for (double step : {0.25, 0.5}) {
      TransferFunction tf;
      tf.name = "slab";
      tf.color_points = {{-1024, 1, 1, 1}, {3071, 1, 1, 1}};
      tf.opacity_points = {{-1000, alpha}, {3071, alpha}};
      RenderOptions o;
      o.step_mm = step;
      o.early_termination = false;
      const Rgba c = render_linear(cube, tf, cam, o).at(32, 32);
      slab = std::max(slab, std::abs(c.a - (1.0 - std::pow(1.0 - alpha, 32))));
    }
  t.expect(slab <= 1e-9, "slab mismatch " + fmt("%.3g", slab));
  return t.done("over max err " + fmt("%.2g", worst) + ", slab max err " + fmt("%.2g", slab));
}

Outcome step_invariance() {
  Tally t;
  const Volume v = testing::masked_phantom(64);
  const MaskGeometry g = mask_geometry(mask_from_foreground(v));
  int worst = 0;
  int renders = 0;
  for (Preset p : kAllPresets) {
    const TransferFunction tf = preset(p);
    for (const ViewSpec spec : {protocol_view(Plane::Axial, SweepAxis::Horizontal, 3),
                                protocol_view(Plane::Coronal, SweepAxis::Vertical, 17)}) {
      const Camera cam = camera_pose(spec.plane, spec.sweep_axis, spec.angle_deg, g, kDefaultImagePx);
      RenderOptions coarse, fine;
      coarse.step_mm = 0.5;
      fine.step_mm = 0.25;
      const Image a = render(v, tf, cam, coarse);
      const Image b = render(v, tf, cam, fine);
      int diff = 0;
      for (std::size_t i = 0; i < a.rgba.size(); ++i) diff = std::max(diff, std::abs(int(a.rgba[i]) - int(b.rgba[i])));
      t.expect(diff <= 2, preset_name(p) + " differs by " + std::to_string(diff));
      worst = std::max(worst, diff);
      ++renders;
    }
  }
  return t.done(std::to_string(renders) + " view pairs at 448, max diff " + std::to_string(worst) + "/255");
}

Outcome determinism() {
  Tally t;
  const auto dir = testing::scratch_dir("acc_determinism");
  std::string listing = "patient_id,label,ct_path,mask_path\n";
  for (int i = 0; i < 3; ++i) {
    const std::string id = "D" + std::to_string(i);
    const auto f = testing::write_patient(dir, id, 32, i);
    listing += id + ",Normal," + f.ct.string() + "," + f.mask.string() + "\n";
  }
  std::ofstream(dir / "list.csv") << listing;
  const int a = run_cli("dataset " + q(dir / "list.csv") + " " + q(dir / "j1") + " --jobs 1 --tf TF2");
  const int b = run_cli("dataset " + q(dir / "list.csv") + " " + q(dir / "j4") + " --jobs 4 --tf TF2");
  t.expect(a == 0 && b == 0, "exit codes");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir / "j1")) {
    const auto other = dir / "j4" / e.path().filename();
    t.expect(fs::exists(other) && bytes_of(e.path()) == bytes_of(other), e.path().filename().string() + " differs");
    ++files;
  }
  std::size_t other_files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "j4")) ++other_files;
  t.expect(files == other_files && files == 253, std::to_string(files) + " vs " + std::to_string(other_files) + " files");
  return t.done(std::to_string(files) + " files byte-identical for 1 and 4 workers");
}

Outcome resampling() {
  Tally t;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> sp(0.5, 3.0);
  std::uniform_real_distribution<double> slope(-5.0, 5.0);
  std::uniform_int_distribution<int> dim(2, 16);
  double worst = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const Dims dims{dim(rng), dim(rng), dim(rng)};
    const Vec3 spacing{sp(rng), sp(rng), sp(rng)};
    const Vec3 origin{-30.0 * trial, 2.0, 11.0};
    const double a0 = 1500.0, bx = slope(rng), by = slope(rng), bz = slope(rng);
    auto field = [&](Vec3 p) { return a0 + bx * p.x + by * p.y + bz * p.z; };
    Volume in = make_volume(dims, spacing);
    in.affine = Affine::scaling(spacing, origin);
    for (int k = 0; k < dims[2]; ++k)
      for (int j = 0; j < dims[1]; ++j)
        for (int i = 0; i < dims[0]; ++i)
          in.at(i, j, k) = static_cast<float>(field(in.affine.apply({double(i), double(j), double(k)})));
    const double target = 1.0;
    const Volume out = resample_isotropic(in, target);
    for (int k = 0; k < out.dims[2]; ++k)
      for (int j = 0; j < out.dims[1]; ++j)
        for (int i = 0; i < out.dims[0]; ++i) {
          // Output voxel centers sit at (o + 0.5) * target in the input's mm extent,
          // clamped to the outermost input centers.
          const int o[3] = {i, j, k};
          double src[3];
          for (int ax = 0; ax < 3; ++ax)
            src[ax] = std::clamp((o[ax] + 0.5) * target / spacing[ax] - 0.5, 0.0, dims[ax] - 1.0);
          const double want = field(in.affine.apply({src[0], src[1], src[2]}));
          worst = std::max(worst, std::abs(out.at(i, j, k) - want) / std::abs(want));
        }
  }
  t.expect(worst <= 1e-5, "relative error " + fmt("%.3g", worst));

  for (float c : {-1024.0f, -512.5f, 0.0f, 42.0f, 3071.0f}) {
    const Volume out = resample_isotropic(make_volume({9, 6, 5}, {0.7, 0.7, 2.5}, c), 1.0);
    t.expect(std::all_of(out.voxels.begin(), out.voxels.end(), [c](float x) { return x == c; }),
             "constant " + fmt("%g", c));
  }
  return t.done("40 affine fields, max relative error " + fmt("%.2g", worst) + "; constants exact");
}

Outcome threshold() {
  Tally t;
  Volume p = make_volume({5, 1, 1}, {1, 1, 1}, 0.0f, ValueKind::Probability);
  p.voxels = {0.75f, std::nextafter(0.75f, 0.0f), std::nextafter(0.75f, 1.0f), 1.0f, 0.0f};
  const BinaryMask m = threshold_mask(p);
  t.expect(m.bits[0], "0.75 excluded");
  t.expect(!m.bits[1], "just below 0.75 included");
  t.expect(m.bits[2] && m.bits[3] && !m.bits[4], "neighbours");
  return t.done("0.75 kept, nextafter(0.75, 0) dropped");
}

Outcome metrics_oracle() {
  using namespace lungbeam::metrics;
  Tally t;
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<long> cell(0, 25);
  auto safe = [](double a, double b) { return b == 0.0 ? 0.0 : a / b; };
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int k = trial % 2 ? 3 : 2;
    std::vector<int> pred, truth;
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        for (long n = cell(rng) + (a == 0 && b == 0); n > 0; --n) {
          truth.push_back(a);
          pred.push_back(b);
        }
    const std::vector<std::string> names =
        k == 3 ? std::vector<std::string>{"COVID19", "CAP", "Normal"} : std::vector<std::string>{"COVID19", "NonCOVID"};
    const ConfusionMatrix cm = confusion(pred, truth, names);
    const Averages avg = micro_macro(cm);

    double TP = 0, FP = 0, FN = 0;
    double macro[4] = {0, 0, 0, 0};
    for (int c = 0; c < k; ++c) {
      double tp = 0, fp = 0, fn = 0, tn = 0;
      for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i] == c, y = truth[i] == c;
        tp += p && y;
        fp += p && !y;
        fn += !p && y;
        tn += !p && !y;
      }
      const double sens = safe(tp, tp + fn), spec = safe(tn, tn + fp), prec = safe(tp, tp + fp);
      const double f1 = safe(2 * tp, 2 * tp + fp + fn);
      const ClassMetrics m = per_class(cm, c);
      worst = std::max({worst, std::abs(m.sens - sens), std::abs(m.spec - spec), std::abs(m.prec - prec),
                        std::abs(m.f1 - f1)});
      macro[0] += sens / k;
      macro[1] += spec / k;
      macro[2] += prec / k;
      macro[3] += f1 / k;
      TP += tp;
      FP += fp;
      FN += fn;
    }
    worst = std::max({worst, std::abs(avg.macro.sens - macro[0]), std::abs(avg.macro.spec - macro[1]),
                      std::abs(avg.macro.prec - macro[2]), std::abs(avg.macro.f1 - macro[3])});
    const double micro_p = TP / (TP + FP), micro_r = TP / (TP + FN);
    worst = std::max({worst, std::abs(avg.micro.prec - micro_p), std::abs(avg.micro.sens - micro_r),
                      std::abs(avg.micro.f1 - 2 * micro_p * micro_r / (micro_p + micro_r))});
    double correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == truth[i];
    t.expect(std::abs(avg.micro.f1 - accuracy(cm)) <= 1e-12, "micro-F1 != accuracy");
    worst = std::max(worst, std::abs(accuracy(cm) - correct / pred.size()));
  }
  t.expect(worst <= 1e-12, "metric error " + fmt("%.3g", worst));

  std::uniform_real_distribution<double> u(0.0, 1.0);
  double auc_worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 10 + trial;
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = u(rng) < 0.5;
      s[i] = trial % 3 == 0 ? std::floor(u(rng) * 5.0) : u(rng) + 0.3 * y[i];
    }
    y[0] = 1;
    y[1] = 0;
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (y[i] && !y[j]) {
          pairs += 1;
          wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
        }
    auc_worst = std::max(auc_worst, std::abs(auc(roc(s, y)) - wins / pairs));
  }
  t.expect(auc_worst <= 1e-12, "AUC error " + fmt("%.3g", auc_worst));
  return t.done("100 matrices max err " + fmt("%.2g", worst) + ", 100 AUC sets max err " + fmt("%.2g", auc_worst));
}

Outcome nifti_io() {
  Tally t;
  const auto dir = testing::scratch_dir("acc_nifti");
  std::mt19937_64 rng(200);
  std::uniform_int_distribution<int> dim(1, 10);
  std::uniform_real_distribution<float> sp(0.25f, 4.0f), val(-1024.0f, 3071.0f), off(-300.0f, 300.0f);
  for (int i = 0; i < 200; ++i) {
    Volume v = make_volume({dim(rng), dim(rng), dim(rng)}, {sp(rng), sp(rng), sp(rng)});
    v.affine = Affine::scaling(v.spacing, {off(rng), off(rng), off(rng)});
    for (float& x : v.voxels) x = val(rng);
    const auto path = dir / (i % 2 ? "v.nii.gz" : "v.nii");
    write_nifti(v, path);
    t.expect(read_nifti(path) == v, "volume " + std::to_string(i));
  }

  // int16, slope 2, intercept -1024: raw r decodes to 2r - 1024.
  std::vector<std::uint8_t> b(352 + 2 * 8, 0);
  auto put16 = [&](std::size_t o, std::int16_t v) { std::memcpy(&b[o], &v, 2); };
  auto put32 = [&](std::size_t o, std::int32_t v) { std::memcpy(&b[o], &v, 4); };
  auto putf = [&](std::size_t o, float v) { std::memcpy(&b[o], &v, 4); };
  put32(0, 348);
  put16(40, 3);
  put16(42, 2);
  put16(44, 2);
  put16(46, 2);
  put16(70, 4);
  put16(72, 16);
  for (int a = 0; a < 4; ++a) putf(76 + 4 * a, 1.0f);
  putf(108, 352.0f);
  putf(112, 2.0f);
  putf(116, -1024.0f);
  std::memcpy(&b[344], "n+1", 4);
  const std::int16_t raw[8] = {0, 512, 2047, 1, -1, 100, 300, 1000};
  for (int i = 0; i < 8; ++i) put16(352 + 2 * i, raw[i]);
  const Volume fx = nifti::parse(b);
  const float want[8] = {-1024.0f, 0.0f, 3070.0f, -1022.0f, -1026.0f, -824.0f, -424.0f, 976.0f};
  for (int i = 0; i < 8; ++i) t.expect(fx.voxels[i] == want[i], "fixture voxel " + std::to_string(i));
  return t.done("200 round trips; int16 slope/intercept fixture exact");
}

Outcome tf_presets() {
  Tally t;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const TransferFunction tf2 = preset(Preset::TF2);
  for (double hu = -1024.0; hu <= 3071.0; hu += 0.25) {
    const bool inside = hu >= -700.0 && hu <= -300.0;
    t.expect((tf2.opacity(hu) > 0.0) == inside, "TF2 at " + fmt("%g", hu));
  }
  t.expect(tf2.opacity(std::nextafter(-700.0, -kInf)) == 0.0 && tf2.opacity(std::nextafter(-300.0, kInf)) == 0.0,
           "TF2 edges");
  t.expect(tf2.opacity(-700.0) > 0.0 && tf2.opacity(-300.0) > 0.0, "TF2 endpoints");

  const TransferFunction tf3 = preset(Preset::TF3);
  for (double hu = -750.0; hu <= -200.0; hu += 0.25) {
    const auto c = tf3.color(hu);
    t.expect(c[0] == c[1] && c[1] == c[2], "TF3 hue at " + fmt("%g", hu));
  }

  for (Preset p : kAllPresets) {
    const TransferFunction tf = preset(p);
    for (const auto& cp : tf.color_points) {
      const auto c = tf.color(cp.hu);
      t.expect(c[0] == cp.r && c[1] == cp.g && c[2] == cp.b, tf.name + " color point");
    }
    for (const auto& op : tf.opacity_points) t.expect(tf.opacity(op.hu) == op.alpha, tf.name + " opacity point");
  }
  return t.done("TF2 support [-700,-300]; TF3 gray; control points exact for TF1..TF6");
}

Outcome service_parity() {
  Tally t;
  const auto dir = testing::scratch_dir("acc_parity");
  fs::create_directories(dir / "vols");
  write_nifti(testing::masked_phantom(64, 2), dir / "vols" / "P9.nii.gz");
  ServiceConfig cfg;
  cfg.volumes_dir = dir / "vols";
  cfg.tf_dir = dir / "tfs";
  PreviewService svc(cfg);

  int compared = 0;
  for (const auto& [view, tf] : std::vector<std::pair<std::string, std::string>>{
           {"axial:h:10", "TF6"}, {"coronal:v:0", "TF2"}, {"axial:v:20", "TF4"}}) {
    const ViewSpec spec = parse_view(view);
    const nlohmann::json req = {{"volume_id", "P9"},       {"tf", tf},
                                {"plane", to_string(spec.plane)}, {"sweep_axis", to_string(spec.sweep_axis)},
                                {"angle_deg", spec.angle_deg},    {"resolution", 448}};
    const Response r = svc.render(req.dump());
    t.expect(r.status == 200, view + " status " + std::to_string(r.status));
    const auto out = dir / ("cli_" + std::to_string(compared) + ".png");
    const int code = run_cli("render " + q(dir / "vols" / "P9.nii.gz") + " " + view + " " + q(out) + " --tf " + tf +
                             " --resolution 448");
    t.expect(code == 0, "cli exit " + std::to_string(code));
    const auto cli = bytes_of(out);
    t.expect(std::string(cli.begin(), cli.end()) == r.body, view + " bytes differ");
    ++compared;
  }
  return t.done(std::to_string(compared) + " views at 448 byte-equal between POST /render and render");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"view-protocol", view_protocol},
      {"consensus-worked-example", worked_consensus},
      {"compositing-oracle", compositing},
      {"step-invariance", step_invariance},
      {"determinism", determinism},
      {"resampling-exactness", resampling},
      {"threshold-semantics", threshold},
      {"metrics-oracle", metrics_oracle},
      {"nifti-round-trip", nifti_io},
      {"tf-presets", tf_presets},
      {"service-engine-parity", service_parity},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
