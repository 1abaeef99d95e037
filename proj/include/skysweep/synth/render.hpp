#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "skysweep/common/errors.hpp"
#include "skysweep/core/tensor.hpp"
#include "skysweep/geometry/camera.hpp"
#include "skysweep/io/png_io.hpp"
#include "skysweep/synth/scene.hpp"

namespace skysweep {

struct ViewRecord {
  ImageU8 image;
  Tensor<float> depth;              // [H,W], 0 = invalid
  std::vector<std::uint8_t> fill_mask;  // 1 where the hole fill synthesized the pixel
  CameraModel cam;
  int strip = 0, index = 0;
};

// Z-buffer point splatting: every scene point lands on its nearest pixel and
// the smallest depth wins. Residual holes inside the footprint are filled
// from the minimum-depth valid neighbor (up to `fill_passes` dilation rounds)
// and flagged in fill_mask.
inline ViewRecord render_view(const SceneModel& scene, const CameraModel& cam,
                              int fill_passes = 6) {
  const int w = cam.width;
  const int h = cam.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  ViewRecord out;
  out.cam = cam;
  out.image.width = w;
  out.image.height = h;
  out.image.rgb.assign(n * 3, 0);
  out.depth = Tensor<float>::zeros({h, w});
  out.fill_mask.assign(n, 0);

  std::vector<float> zbuf(n, std::numeric_limits<float>::infinity());
  float* depth = out.depth.data();
  std::uint8_t* rgb = out.image.rgb.data();
  Projection pr;
  std::size_t hits = 0;
  for (const ColoredPoint& p : scene.points()) {
    if (!cam.try_project(Eigen::Vector3d(p.x, p.y, p.z), pr)) continue;
    const int px = static_cast<int>(std::lround(pr.u));
    const int py = static_cast<int>(std::lround(pr.v));
    if (px < 0 || px >= w || py < 0 || py >= h) continue;
    const std::size_t at = static_cast<std::size_t>(py) * w + px;
    if (pr.depth < zbuf[at]) {
      zbuf[at] = static_cast<float>(pr.depth);
      depth[at] = static_cast<float>(pr.depth);
      rgb[at * 3 + 0] = p.r;
      rgb[at * 3 + 1] = p.g;
      rgb[at * 3 + 2] = p.b;
      ++hits;
    }
  }
  if (hits == 0) throw degenerate_error("render_view: camera sees no scene content");

  for (int pass = 0; pass < fill_passes; ++pass) {
    std::vector<std::size_t> holes;
    for (std::size_t i = 0; i < n; ++i)
      if (depth[i] == 0.0f) holes.push_back(i);
    if (holes.empty()) break;
    std::vector<std::pair<std::size_t, std::size_t>> fills;  // hole, donor
    for (const std::size_t at : holes) {
      const int y = static_cast<int>(at) / w;
      const int x = static_cast<int>(at) % w;
      float best = std::numeric_limits<float>::infinity();
      std::size_t donor = n;
      for (int oy = -1; oy <= 1; ++oy) {
        for (int ox = -1; ox <= 1; ++ox) {
          const int nx = x + ox, ny = y + oy;
          if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
          const std::size_t na = static_cast<std::size_t>(ny) * w + nx;
          if (depth[na] > 0.0f && depth[na] < best) {
            best = depth[na];
            donor = na;
          }
        }
      }
      if (donor < n) fills.emplace_back(at, donor);
    }
    if (fills.empty()) break;
    for (const auto& [at, donor] : fills) {
      depth[at] = depth[donor];
      rgb[at * 3 + 0] = rgb[donor * 3 + 0];
      rgb[at * 3 + 1] = rgb[donor * 3 + 1];
      rgb[at * 3 + 2] = rgb[donor * 3 + 2];
      out.fill_mask[at] = 1;
    }
  }
  return out;
}

// disparity = f*B/Z for a rectified same-strip pair; 0 where depth invalid.
inline Tensor<float> disparity_from_depth(const Tensor<float>& depth, const CameraModel& a,
                                          const CameraModel& b) {
  if (depth.shape().rank != 2) throw contract_error("disparity_from_depth: depth must be [H,W]");
  if (((a.r - b.r).cwiseAbs().maxCoeff()) > 1e-12)
    throw contract_error("disparity_from_depth: pair is not rectified (rotations differ)");
  const Eigen::Vector3d t = a.r * (b.c - a.c);
  const double base = t.norm();
  if (!(base > 0)) throw contract_error("disparity_from_depth: zero baseline");
  if (std::abs(t.y()) > 1e-9 * base || std::abs(t.z()) > 1e-9 * base)
    throw contract_error("disparity_from_depth: baseline not along the image u axis");
  Tensor<float> disp = Tensor<float>::zeros(depth.shape());
  const float* d = depth.data();
  float* o = disp.data();
  const double fb = a.f * base;
  for (std::int64_t i = 0; i < depth.numel(); ++i)
    if (d[i] > 0.0f) o[i] = static_cast<float>(fb / d[i]);
  return disp;
}

}  // namespace skysweep
