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

#include "lungbeam/renderer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "lungbeam/error.hpp"

namespace lungbeam {
namespace {

constexpr int kLutMinHu = -1024;
constexpr int kLutSize = 4096;
constexpr int kBlockShift = 2;
constexpr int kBlock = 1 << kBlockShift;
constexpr double kFlatHu = 1e-3;
constexpr double kMaxPieceDepth = 0.05;
constexpr int kMaxParts = 64;
constexpr int kMaxRefine = 4;
constexpr double kBendHu = 1.0;
constexpr double kSteepTau = 0.005;
constexpr double kSteepMarginHu = 8.0;

struct Tap {
  int lo;
  int hi;
  double w;
};

inline Tap tap(double u, int n) {
  u = std::clamp(u, 0.0, static_cast<double>(n - 1));
  const int lo = static_cast<int>(u);
  return {lo, std::min(lo + 1, n - 1), u - lo};
}

inline double lerp(double a, double b, double w) { return a + w * (b - a); }

inline double trilinear(const Volume& v, const Tap& x, const Tap& y, const Tap& z) {
  const double c00 = lerp(v.at(x.lo, y.lo, z.lo), v.at(x.hi, y.lo, z.lo), x.w);
  const double c10 = lerp(v.at(x.lo, y.hi, z.lo), v.at(x.hi, y.hi, z.lo), x.w);
  const double c01 = lerp(v.at(x.lo, y.lo, z.hi), v.at(x.hi, y.lo, z.hi), x.w);
  const double c11 = lerp(v.at(x.lo, y.hi, z.hi), v.at(x.hi, y.hi, z.hi), x.w);
  return lerp(lerp(c00, c10, y.w), lerp(c01, c11, y.w), z.w);
}

inline bool inside_box(const Volume& v, Vec3 p) {
  return p.x >= -0.5 && p.x <= v.dims[0] - 0.5 && p.y >= -0.5 && p.y <= v.dims[1] - 0.5 &&
         p.z >= -0.5 && p.z <= v.dims[2] - 0.5;
}

// Transfer function baked at integer HU as extinction per mm, with running
// integrals so a ray piece can be integrated between its end values.
class Lut {
 public:
  // Value plus the extinction and emission integrals up to it.
  struct Point {
    double hu = 0.0;
    double t = 0.0;
    std::array<double, 3> k{};
  };

  explicit Lut(const TransferFunction& tf)
      : nodes_(kLutSize), nonzero_prefix_(kLutSize + 1, 0), steep_prefix_(kLutSize + 1, 0) {
    for (int i = 0; i < kLutSize; ++i) {
      const Rgba c = tf.evaluate(static_cast<double>(kLutMinHu + i));
      const double a = std::min(c.a, kMaxAlpha);
      Node& n = nodes_[i];
      n.tau = a > 0.0 ? -std::log1p(-a) / tf.reference_step_mm : 0.0;
      n.color = {c.r, c.g, c.b};
      for (int ch = 0; ch < 3; ++ch) n.p[ch] = n.tau * n.color[ch];
      nonzero_prefix_[i + 1] = nonzero_prefix_[i] + (a > 0.0 ? 1 : 0);
    }
    for (int i = 0; i + 1 < kLutSize; ++i) {
      Node& n = nodes_[i];
      const Node& m = nodes_[i + 1];
      n.dtau = m.tau - n.tau;
      for (int ch = 0; ch < 3; ++ch) {
        n.dp[ch] = m.p[ch] - n.p[ch];
        n.dcolor[ch] = m.color[ch] - n.color[ch];
      }
      m_t(i + 1) = n.t + n.tau + 0.5 * n.dtau;
      for (int ch = 0; ch < 3; ++ch) nodes_[i + 1].k[ch] = n.k[ch] + n.p[ch] + 0.5 * n.dp[ch];
      steep_prefix_[i + 1] = steep_prefix_[i] + (std::abs(n.dtau) > kSteepTau ? 1 : 0);
    }
    steep_prefix_[kLutSize] = steep_prefix_[kLutSize - 1];
  }

  static double clamp_hu(double hu) { return std::clamp(hu, double(kLutMinHu), double(kLutMinHu + kLutSize - 1)); }

  // `hu` already clamped.
  Point at(double hu) const {
    const double x = hu - kLutMinHu;
    const int i = std::min(static_cast<int>(x), kLutSize - 2);
    const double w = x - i;
    const Node& n = nodes_[i];
    Point p;
    p.hu = hu;
    p.t = n.t + w * (n.tau + 0.5 * w * n.dtau);
    for (int ch = 0; ch < 3; ++ch) p.k[ch] = n.k[ch] + w * (n.p[ch] + 0.5 * w * n.dp[ch]);
    return p;
  }

  // Mean extinction (in `a`) and color of a piece whose value runs linearly
  // between the two points.
  Rgba piece(const Point& front, const Point& back) const {
    const double dh = back.hu - front.hu;
    double tau = 0.0;
    std::array<double, 3> c{};
    if (std::abs(dh) < kFlatHu) {
      const double x = 0.5 * (front.hu + back.hu) - kLutMinHu;
      const int i = std::min(static_cast<int>(x), kLutSize - 2);
      const double w = x - i;
      const Node& n = nodes_[i];
      tau = n.tau + w * n.dtau;
      if (tau <= 0.0) return {};
      for (int ch = 0; ch < 3; ++ch) c[ch] = n.color[ch] + w * n.dcolor[ch];
    } else {
      const double dt = back.t - front.t;
      tau = dt / dh;
      if (!(tau > 0.0)) return {};
      const double inv = 1.0 / dt;
      for (int ch = 0; ch < 3; ++ch) c[ch] = std::clamp((back.k[ch] - front.k[ch]) * inv, 0.0, 1.0);
    }
    return {c[0], c[1], c[2], tau};
  }

  // True when extinction changes sharply anywhere near [a, b].
  bool steep(double a, double b) const {
    const int lo = std::clamp(static_cast<int>(std::min(a, b) - kSteepMarginHu) - kLutMinHu, 0, kLutSize - 1);
    const int hi = std::clamp(static_cast<int>(std::max(a, b) + kSteepMarginHu) - kLutMinHu, 0, kLutSize - 1);
    return steep_prefix_[hi + 1] - steep_prefix_[lo] > 0;
  }

  // True when every HU in [lo, hi] maps to zero opacity.
  bool transparent(double lo, double hi) const {
    const int a = std::clamp(static_cast<int>(std::floor(lo)) - kLutMinHu, 0, kLutSize - 1);
    const int b = std::clamp(static_cast<int>(std::ceil(hi)) - kLutMinHu, 0, kLutSize - 1);
    return nonzero_prefix_[b + 1] - nonzero_prefix_[a] == 0;
  }

 private:
  static constexpr double kMaxAlpha = 1.0 - 1e-12;

  // Tables are linear between nodes; t and k integrate tau and tau * color
  // from the first node.
  struct Node {
    double tau = 0.0, dtau = 0.0, t = 0.0;
    std::array<double, 3> color{}, dcolor{}, p{}, dp{}, k{};
  };
  double& m_t(int i) { return nodes_[i].t; }

  std::vector<Node> nodes_;
  std::vector<int> nonzero_prefix_;
  std::vector<int> steep_prefix_;
};

// Per 8^3 cell block: can any trilinear sample inside it be visible?
class Occupancy {
 public:
  Occupancy(const Volume& v, const Lut& lut) {
    for (int a = 0; a < 3; ++a) blocks_[a] = (v.dims[a] + kBlock - 1) / kBlock;
    visible_.assign(static_cast<std::size_t>(blocks_[0]) * blocks_[1] * blocks_[2], 0);
    std::size_t idx = 0;
    for (int bz = 0; bz < blocks_[2]; ++bz) {
      for (int by = 0; by < blocks_[1]; ++by) {
        for (int bx = 0; bx < blocks_[0]; ++bx, ++idx) {
          float lo = std::numeric_limits<float>::max();
          float hi = std::numeric_limits<float>::lowest();
          const int k1 = std::min(bz * kBlock + kBlock, v.dims[2] - 1);
          const int j1 = std::min(by * kBlock + kBlock, v.dims[1] - 1);
          const int i1 = std::min(bx * kBlock + kBlock, v.dims[0] - 1);
          for (int k = bz * kBlock; k <= k1; ++k) {
            for (int j = by * kBlock; j <= j1; ++j) {
              for (int i = bx * kBlock; i <= i1; ++i) {
                const float s = v.at(i, j, k);
                lo = std::min(lo, s);
                hi = std::max(hi, s);
              }
            }
          }
          visible_[idx] = lut.transparent(lo, hi) ? 0 : 1;
          if (visible_[idx]) {
            const int b[3] = {bx, by, bz};
            for (int a = 0; a < 3; ++a) {
              first_[a] = std::min(first_[a], b[a]);
              last_[a] = std::max(last_[a], b[a]);
            }
          }
        }
      }
    }
    // Index-space box outside which no sample can be visible.
    if (!any()) return;
    for (int a = 0; a < 3; ++a) {
      lo_[a] = first_[a] <= 0 ? -std::numeric_limits<double>::infinity() : first_[a] * kBlock;
      hi_[a] = (last_[a] + 1) * kBlock >= v.dims[a] - 1 ? std::numeric_limits<double>::infinity()
                                                          : (last_[a] + 1) * kBlock;
    }
  }

  bool any() const { return last_[0] >= 0; }

  // Parameter range of o + t d inside the visible box.
  bool clip(Vec3 o, Vec3 d, double& t0, double& t1) const {
    if (!any()) return false;
    t0 = -std::numeric_limits<double>::infinity();
    t1 = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
      if (std::abs(d[a]) < 1e-15) {
        if (o[a] < lo_[a] || o[a] > hi_[a]) return false;
        continue;
      }
      double ta = (lo_[a] - o[a]) / d[a];
      double tb = (hi_[a] - o[a]) / d[a];
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
    }
    return t1 >= t0;
  }

  bool visible(int i, int j, int k) const {
    return visible_[static_cast<std::size_t>(i >> kBlockShift) +
                    static_cast<std::size_t>(blocks_[0]) *
                        (static_cast<std::size_t>(j >> kBlockShift) +
                         static_cast<std::size_t>(blocks_[1]) * static_cast<std::size_t>(k >> kBlockShift))] != 0;
  }

 private:
  std::array<int, 3> blocks_{};
  std::array<int, 3> first_{std::numeric_limits<int>::max(), std::numeric_limits<int>::max(),
                            std::numeric_limits<int>::max()};
  std::array<int, 3> last_{-1, -1, -1};
  std::array<double, 3> lo_{};
  std::array<double, 3> hi_{};
  std::vector<std::uint8_t> visible_;
};

// Parametric interval of the line o + t d inside the voxel box (index space).
bool clip_to_box(const Volume& v, Vec3 o, Vec3 d, double& t0, double& t1) {
  t0 = -std::numeric_limits<double>::infinity();
  t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double lo = -0.5;
    const double hi = v.dims[a] - 0.5;
    if (std::abs(d[a]) < 1e-15) {
      if (o[a] < lo || o[a] > hi) return false;
      continue;
    }
    double ta = (lo - o[a]) / d[a];
    double tb = (hi - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  return t1 > t0;
}

// One ray. Segment ends are anchored at the box entry, every `step`; the field
// is taken as linear between the ends of each piece, pieces being cut where
// the ray crosses a cell face (where trilinear interpolation has kinks) and,
// over sharp parts of the transfer function, halved where the field bends.
class RayMarch {
 public:
  using Point = Lut::Point;

  RayMarch(const Volume& v, const Lut& lut, const Occupancy& occ, Vec3 o, Vec3 d, bool early)
      : lut_(lut), occ_(occ), o_(o), d_(d), early_(early), nx_(v.dims[0]), ny_(v.dims[1]), nz_(v.dims[2]),
        sy_(nx_), sz_(static_cast<std::ptrdiff_t>(nx_) * ny_), data_(v.voxels.data()) {}

  Rgba run(double step, const Volume& v) {
    double t0 = 0.0, t1 = 0.0;
    if (!clip_to_box(v, o_, d_, t0, t1)) return acc_;
    // The visible range only narrows which segments are visited.
    double v0 = 0.0, v1 = 0.0;
    if (!occ_.clip(o_, d_, v0, v1)) return acc_;
    const long k0 = std::max(0L, static_cast<long>(std::max(0.0, (v0 - t0) / step)) - 1);
    const double t_end = std::min(t1, v1 + step);
    // Ends of a segment no longer than a block lie in the same or touching
    // blocks, whose value ranges overlap.
    const bool can_skip = step * norm(d_) <= kBlock;

    double ta = t0 + static_cast<double>(k0) * step;
    if (ta >= t_end) return acc_;
    start_planes(ta);
    bool vis_a = false;
    Point pa = lut_.at(sample(ta, vis_a));
    for (long k = k0 + 1;; ++k) {
      if (!vis_a) {
        // Every piece ending inside the current invisible block is clear.
        const double tx = block_exit(ta);
        long kj = static_cast<long>(std::floor((tx - t0) / step));
        while (kj >= k && t0 + static_cast<double>(kj) * step > tx) --kj;
        if (kj >= k) {
          ta = std::min(t0 + static_cast<double>(kj) * step, t1);
          if (ta >= t_end) break;
          pa = lut_.at(sample(ta, vis_a));
          skip_planes(ta);
          k = kj + 1;
        }
      }
      const double tb = std::min(t0 + static_cast<double>(k) * step, t1);
      if (!(tb > ta)) break;
      bool vis_b = false;
      const Point pb = lut_.at(sample(tb, vis_b));
      if (vis_a || vis_b || !can_skip) {
        if (segment(ta, pa, tb, pb)) break;
      } else {
        skip_planes(tb);
      }
      if (tb >= t_end) break;
      ta = tb;
      pa = pb;
      vis_a = vis_b;
    }
    return acc_;
  }

 private:
  double sample(double t, bool& visible) const {
    const double fx = std::clamp(o_.x + t * d_.x, 0.0, nx_ - 1.0);
    const double fy = std::clamp(o_.y + t * d_.y, 0.0, ny_ - 1.0);
    const double fz = std::clamp(o_.z + t * d_.z, 0.0, nz_ - 1.0);
    const int ix = static_cast<int>(fx), iy = static_cast<int>(fy), iz = static_cast<int>(fz);
    visible = occ_.visible(ix, iy, iz);
    const double wx = fx - ix, wy = fy - iy, wz = fz - iz;
    const std::ptrdiff_t ox = ix < nx_ - 1 ? 1 : 0;
    const std::ptrdiff_t oy = iy < ny_ - 1 ? sy_ : 0;
    const std::ptrdiff_t oz = iz < nz_ - 1 ? sz_ : 0;
    const float* p = data_ + ix + sy_ * iy + sz_ * iz;
    const double c00 = lerp(p[0], p[ox], wx);
    const double c10 = lerp(p[oy], p[oy + ox], wx);
    const double c01 = lerp(p[oz], p[oz + ox], wx);
    const double c11 = lerp(p[oz + oy], p[oz + oy + ox], wx);
    return Lut::clamp_hu(lerp(lerp(c00, c10, wy), lerp(c01, c11, wy), wz));
  }

  // Ray parameter where o + t d leaves the occupancy block holding it.
  double block_exit(double t) const {
    const double lim[3] = {nx_ - 1.0, ny_ - 1.0, nz_ - 1.0};
    double tx = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
      if (d_[a] == 0.0) continue;
      const int b = static_cast<int>(std::clamp(o_[a] + t * d_[a], 0.0, lim[a])) >> kBlockShift;
      const double plane = static_cast<double>((d_[a] > 0.0 ? b + 1 : b) << kBlockShift);
      tx = std::min(tx, (plane - o_[a]) / d_[a]);
    }
    return tx;
  }

  Point point(double t) const {
    bool unused = false;
    return lut_.at(sample(t, unused));
  }

  void start_planes(double t) {
    for (int a = 0; a < 3; ++a) {
      if (d_[a] == 0.0) {
        next_[a] = std::numeric_limits<double>::infinity();
        continue;
      }
      const double x = o_[a] + t * d_[a];
      const double plane = d_[a] > 0.0 ? std::floor(x) + 1.0 : std::ceil(x) - 1.0;
      next_[a] = (plane - o_[a]) / d_[a];
      pitch_[a] = 1.0 / std::abs(d_[a]);
    }
  }

  int next_axis() const {
    return next_[0] <= next_[1] ? (next_[0] <= next_[2] ? 0 : 2) : (next_[1] <= next_[2] ? 1 : 2);
  }

  void skip_planes(double tb) {
    for (int a = 0; a < 3; ++a) {
      if (next_[a] < tb) next_[a] += std::ceil((tb - next_[a]) / pitch_[a]) * pitch_[a];
    }
  }

  bool segment(double ta, const Point& pa, double tb, const Point& pb) {
    double tp = ta;
    Point pp = pa;
    for (int a = next_axis(); next_[a] < tb; a = next_axis()) {
      const double tc = next_[a];
      next_[a] += pitch_[a];
      if (!(tc > tp)) continue;
      const Point pc = point(tc);
      if (refine(tp, pp, tc, pc, 0)) return true;
      tp = tc;
      pp = pc;
    }
    return refine(tp, pp, tb, pb, 0);
  }

  bool refine(double ta, const Point& pa, double tb, const Point& pb, int depth) {
    if (depth < kMaxRefine && lut_.steep(pa.hu, pb.hu)) {
      const double tm = 0.5 * (ta + tb);
      const Point pm = point(tm);
      if (std::abs(pm.hu - 0.5 * (pa.hu + pb.hu)) > kBendHu)
        return refine(ta, pa, tm, pm, depth + 1) || refine(tm, pm, tb, pb, depth + 1);
    }
    return composite(pa, pb, tb - ta);
  }

  // Opaque pieces with varying value are split so that attenuation inside
  // the piece is accounted for.
  bool composite(const Point& front, const Point& back, double length) {
    const Rgba s = lut_.piece(front, back);
    const double depth = s.a * length;
    if (depth <= kMaxPieceDepth || std::abs(back.hu - front.hu) < kFlatHu) return accumulate(s, depth);
    const int parts = std::min(kMaxParts, static_cast<int>(std::ceil(depth / kMaxPieceDepth)));
    Point f = front;
    for (int i = 1; i <= parts; ++i) {
      const Point b = i == parts ? back : lut_.at(lerp(front.hu, back.hu, static_cast<double>(i) / parts));
      const Rgba part = lut_.piece(f, b);
      if (accumulate(part, part.a * (length / parts))) return true;
      f = b;
    }
    return false;
  }

  bool accumulate(Rgba s, double depth) {
    if (!(depth > 0.0)) return false;
    s.a = -std::expm1(-depth);
    const double weight = (1.0 - acc_.a) * s.a;
    acc_.r += weight * s.r;
    acc_.g += weight * s.g;
    acc_.b += weight * s.b;
    acc_.a += weight;
    return early_ && acc_.a >= kEarlyTerminationAlpha;
  }

  const Lut& lut_;
  const Occupancy& occ_;
  Vec3 o_, d_;
  bool early_;
  int nx_, ny_, nz_;
  std::ptrdiff_t sy_, sz_;
  const float* data_;
  std::array<double, 3> next_{};
  std::array<double, 3> pitch_{};
  Rgba acc_;
};

}  // namespace

Rgba composite_front_to_back(std::span<const Rgba> samples, bool early_termination) {
  Rgba acc;
  for (const Rgba& s : samples) {
    const double weight = (1.0 - acc.a) * s.a;
    acc.r += weight * s.r;
    acc.g += weight * s.g;
    acc.b += weight * s.b;
    acc.a += weight;
    if (early_termination && acc.a >= kEarlyTerminationAlpha) break;
  }
  return acc;
}

double sample_hu(const Volume& volume, Vec3 point_mm, double background_hu) {
  const Vec3 p = volume.affine.inverse().apply(point_mm);
  if (!inside_box(volume, p)) return background_hu;
  return trilinear(volume, tap(p.x, volume.dims[0]), tap(p.y, volume.dims[1]), tap(p.z, volume.dims[2]));
}

RenderBuffer render_linear(const Volume& volume, const TransferFunction& tf, const Camera& camera,
                           const RenderOptions& options) {
  volume.validate();
  tf.validate();
  if (!volume.is_isotropic())
    fail(ErrorCode::NonIsotropicVolume, "resample to isotropic spacing before rendering");
  if (!(options.step_mm > 0.0)) fail(ErrorCode::Usage, "step must be positive");
  if (camera.image_px < 1) fail(ErrorCode::Usage, "image size must be positive");

  const Lut lut(tf);
  const Occupancy occ(volume, lut);
  const Affine to_index = volume.affine.inverse();
  const Vec3 dir_world = camera.view_direction();
  const Vec3 dir = to_index.apply_linear(dir_world);

  RenderBuffer out;
  out.width = camera.image_px;
  out.height = camera.image_px;
  out.pixels.resize(static_cast<std::size_t>(out.width) * out.height);

  const int n = camera.image_px;
  auto render_row = [&](int py) {
    const double v = 1.0 - 2.0 * (py + 0.5) / n;
    for (int px = 0; px < n; ++px) {
      const double u = 2.0 * (px + 0.5) / n - 1.0;
      const Vec3 origin = camera.look_at + (u * camera.half_width) * camera.right +
                          (v * camera.half_height) * camera.up;
      out.pixels[static_cast<std::size_t>(py) * n + px] =
          RayMarch(volume, lut, occ, to_index.apply(origin), dir, options.early_termination)
              .run(options.step_mm, volume);
    }
  };

  unsigned workers = options.threads ? options.threads : std::thread::hardware_concurrency();
  workers = std::clamp(workers, 1u, static_cast<unsigned>(n));
  if (workers == 1) {
    for (int py = 0; py < n; ++py) render_row(py);
    return out;
  }
  std::atomic<int> next_row{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int py = next_row++; py < n; py = next_row++) render_row(py);
    });
  }
  pool.clear();
  return out;
}

Image to_image(const RenderBuffer& buffer) {
  Image img(buffer.width, buffer.height);
  for (int y = 0; y < buffer.height; ++y) {
    for (int x = 0; x < buffer.width; ++x) {
      // Over opaque black: the premultiplied color is the final color.
      const Rgba& c = buffer.at(x, y);
      std::uint8_t* p = img.pixel(x, y);
      p[0] = quantize_unit(c.r);
      p[1] = quantize_unit(c.g);
      p[2] = quantize_unit(c.b);
      p[3] = 255;
    }
  }
  return img;
}

Image render(const Volume& volume, const TransferFunction& tf, const Camera& camera,
             const RenderOptions& options) {
  Image img = to_image(render_linear(volume, tf, camera, options));
  img.meta.tf_name = tf.name;
  return img;
}

std::array<double, 3> jet(double x) {
  x = std::clamp(x, 0.0, 1.0);
  auto ramp = [x](double center) { return std::clamp(1.5 - std::abs(4.0 * x - center), 0.0, 1.0); };
  return {ramp(3.0), ramp(2.0), ramp(1.0)};
}

ActivationMap mean_activation(std::span<const ActivationMap> maps) {
  if (maps.empty()) fail(ErrorCode::EmptyInput, "no activation maps to average");
  ActivationMap mean{maps[0].width, maps[0].height, std::vector<double>(maps[0].values.size(), 0.0)};
  for (const auto& m : maps) {
    if (m.width != mean.width || m.height != mean.height || m.values.size() != mean.values.size())
      fail(ErrorCode::ShapeMismatch, "activation maps differ in size");
    for (std::size_t i = 0; i < m.values.size(); ++i) mean.values[i] += m.values[i];
  }
  const double n = static_cast<double>(maps.size());
  for (double& v : mean.values) v /= n;
  return mean;
}

Image overlay_heatmap(const Image& base, const ActivationMap& activation, double blend) {
  if (!(blend >= 0.0 && blend <= 1.0)) fail(ErrorCode::ValueOutOfRange, "blend outside [0,1]");
  if (activation.width < 1 || activation.height < 1 ||
      activation.values.size() != static_cast<std::size_t>(activation.width) * activation.height)
    fail(ErrorCode::ValueOutOfRange, "activation grid size does not match its values");
  for (double a : activation.values) {
    if (!(a >= 0.0 && a <= 1.0)) fail(ErrorCode::ValueOutOfRange, "activation outside [0,1]");
  }

  Image out = base;
  const double sx = static_cast<double>(activation.width) / base.width;
  const double sy = static_cast<double>(activation.height) / base.height;
  for (int y = 0; y < base.height; ++y) {
    const Tap ty = tap((y + 0.5) * sy - 0.5, activation.height);
    for (int x = 0; x < base.width; ++x) {
      const Tap tx = tap((x + 0.5) * sx - 0.5, activation.width);
      const double a = lerp(lerp(activation.at(tx.lo, ty.lo), activation.at(tx.hi, ty.lo), tx.w),
                            lerp(activation.at(tx.lo, ty.hi), activation.at(tx.hi, ty.hi), tx.w), ty.w);
      const auto color = jet(a);
      std::uint8_t* p = out.pixel(x, y);
      for (int c = 0; c < 3; ++c) {
        p[c] = quantize_unit((1.0 - blend) * (p[c] / 255.0) + blend * color[c]);
      }
      p[3] = 255;
    }
  }
  return out;
}

ActivationMap load_activation_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
  ActivationMap map;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    std::vector<double> values;
    std::string token;
    while (row >> token) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        fail(ErrorCode::MalformedCsv, path.string() + ":" + std::to_string(line_no) + ": bad number '" + token + "'");
      }
    }
    if (values.empty()) continue;
    if (map.width == 0) map.width = static_cast<int>(values.size());
    if (static_cast<int>(values.size()) != map.width)
      fail(ErrorCode::MalformedCsv, path.string() + ":" + std::to_string(line_no) + ": ragged row");
    map.values.insert(map.values.end(), values.begin(), values.end());
    ++map.height;
  }
  if (map.height == 0) fail(ErrorCode::EmptyInput, path.string() + ": no activation values");
  return map;
}

}  // namespace lungbeam
