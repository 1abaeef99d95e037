#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "skysweep/common/errors.hpp"
#include "skysweep/core/ops.hpp"
#include "skysweep/geometry/homography.hpp"

namespace skysweep {

// Bilinear warp of a [C,h,w] feature map by a homography expressed in image
// pixels. Feature coordinates are image coordinates times feature_scale with
// pixel centers at integer coordinates; samples outside the map are zero.
// Taped with exact gradients with respect to the features (the geometry is
// constant).
template <typename T>
Var<T> warp_bilinear(Tape<T>& t, const Var<T>& src, const Eigen::Matrix3d& hmat,
                     double feature_scale) {
  const Shape& s = src.value.shape();
  if (s.rank != 3) throw contract_error("warp_bilinear: features must be [C,h,w]");
  if (!(feature_scale > 0)) throw contract_error("warp_bilinear: feature_scale must be positive");
  const int c = s.extent[0];
  const int h = s.extent[1];
  const int w = s.extent[2];
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;

  // Per output pixel: four source corner indices (-1 when outside) and
  // weights, shared by every channel.
  std::vector<std::int32_t> corner(static_cast<std::size_t>(plane) * 4, -1);
  std::vector<T> weight(static_cast<std::size_t>(plane) * 4, T(0));
  for (int fy = 0; fy < h; ++fy) {
    const double v_img = fy / feature_scale;
    for (int fx = 0; fx < w; ++fx) {
      const double u_img = fx / feature_scale;
      const Eigen::Vector2d m = apply_homography(hmat, u_img, v_img);
      const double sx = m.x() * feature_scale;
      const double sy = m.y() * feature_scale;
      if (!std::isfinite(sx) || !std::isfinite(sy)) continue;
      if (sx <= -1.0 || sx >= w || sy <= -1.0 || sy >= h) continue;
      const double fx0 = std::floor(sx);
      const double fy0 = std::floor(sy);
      const int x0 = static_cast<int>(fx0);
      const int y0 = static_cast<int>(fy0);
      const double ax = sx - fx0;
      const double ay = sy - fy0;
      const double wts[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
      const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
      const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
      const std::size_t at = (static_cast<std::size_t>(fy) * w + fx) * 4;
      for (int k = 0; k < 4; ++k) {
        if (xs[k] < 0 || xs[k] >= w || ys[k] < 0 || ys[k] >= h) continue;
        corner[at + k] = static_cast<std::int32_t>(ys[k] * w + xs[k]);
        weight[at + k] = static_cast<T>(wts[k]);
      }
    }
  }

  Tensor<T> y = Tensor<T>::zeros(s);
  {
    const T* xd = src.value.data();
    T* yd = y.data();
    for (int ch = 0; ch < c; ++ch) {
      const T* xp = xd + ch * plane;
      T* yp = yd + ch * plane;
      for (std::int64_t i = 0; i < plane; ++i) {
        const std::size_t at = static_cast<std::size_t>(i) * 4;
        T acc = 0;
        for (int k = 0; k < 4; ++k) {
          const std::int32_t idx = corner[at + k];
          if (idx >= 0) acc += weight[at + k] * xp[idx];
        }
        yp[i] = acc;
      }
    }
  }
  require_finite(y, "warp_bilinear");
  if (!t.recording()) return {std::move(y), -1};
  auto bp = [corner = std::move(corner), weight = std::move(weight), xn = src.node, c,
             plane](Tape<T>& tp, const Tensor<T>& gy) {
    if (xn < 0) return;
    T* gx = tp.grad_buffer(xn).data();
    const T* gyd = gy.data();
    for (int ch = 0; ch < c; ++ch) {
      T* gxp = gx + ch * plane;
      const T* gyp = gyd + ch * plane;
      for (std::int64_t i = 0; i < plane; ++i) {
        const std::size_t at = static_cast<std::size_t>(i) * 4;
        const T g = gyp[i];
        for (int k = 0; k < 4; ++k) {
          const std::int32_t idx = corner[at + k];
          if (idx >= 0) gxp[idx] += weight[at + k] * g;
        }
      }
    }
  };
  return t.record(std::move(y), std::move(bp));
}

}  // namespace skysweep
