#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "skysweep/common/errors.hpp"
#include "skysweep/geometry/homography.hpp"
#include "skysweep/synth/render.hpp"

namespace skysweep {

// View IDs follow the flight grid: 1 is the reference, 0/2 its heading
// neighbors (same strip), 3/4 the side neighbors (previous/next strip).
struct MultiViewUnit {
  std::vector<ViewRecord> views;  // indexed by view ID, size N
  int n = 3;
  int strip = 0, index = 0;  // reference position, 0-based
  std::string name;          // strip_image, 1-based, e.g. "002_3"
};

inline std::string unit_name(int strip, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%03d_%d", strip + 1, index + 1);
  return buf;
}

// Units centered on every interior image of the grid; border images without
// the required neighbors are skipped.
inline std::vector<MultiViewUnit> make_units(const std::vector<std::vector<ViewRecord>>& grid,
                                             int n) {
  if (n != 3 && n != 5) throw contract_error("make_units: N must be 3 or 5");
  const int strips = static_cast<int>(grid.size());
  std::vector<MultiViewUnit> units;
  for (int s = 0; s < strips; ++s) {
    const int count = static_cast<int>(grid[s].size());
    for (int i = 1; i + 1 < count; ++i) {
      if (n == 5 && (s == 0 || s + 1 >= strips ||
                     i >= static_cast<int>(grid[s - 1].size()) ||
                     i >= static_cast<int>(grid[s + 1].size())))
        continue;
      MultiViewUnit u;
      u.n = n;
      u.strip = s;
      u.index = i;
      u.name = unit_name(s, i);
      u.views.push_back(grid[s][i - 1]);
      u.views.push_back(grid[s][i]);
      u.views.push_back(grid[s][i + 1]);
      if (n == 5) {
        u.views.push_back(grid[s - 1][i]);
        u.views.push_back(grid[s + 1][i]);
      }
      units.push_back(std::move(u));
    }
  }
  return units;
}

// One cropped sub-unit: per-view rasters plus per-tile cameras whose
// principal points absorb the crop offset.
struct CroppedTile {
  std::string unit;
  int tile = 0;
  std::vector<ImageU8> images;
  std::vector<Tensor<float>> depths;
  std::vector<std::vector<std::uint8_t>> fill_masks;
  std::vector<CameraModel> cams;
  std::vector<DepthPlan> plans;
};

namespace detail {

struct Rect {
  double x0, y0, x1, y1;  // inclusive pixel bounds
};

inline void depth_range(const Tensor<float>& depth, double& lo, double& hi) {
  lo = 1e30;
  hi = -1e30;
  const float* d = depth.data();
  for (std::int64_t i = 0; i < depth.numel(); ++i) {
    if (d[i] <= 0) continue;
    lo = std::min(lo, static_cast<double>(d[i]));
    hi = std::max(hi, static_cast<double>(d[i]));
  }
  if (hi < lo) throw degenerate_error("depth_range: no valid depth");
}

inline DepthPlan plan_for(const Tensor<float>& depth, double interval) {
  double lo, hi;
  depth_range(depth, lo, hi);
  const double d_min = lo - 5 * interval;
  if (!(d_min > 0)) throw contract_error("plan_for: padded d_min not positive");
  const int count =
      static_cast<int>(std::ceil((hi - lo) / interval)) + 11;  // 5 planes padding each side
  return DepthPlan(d_min, interval, std::max(count, 2));
}

}  // namespace detail

// Tiles the reference region whose full depth range stays inside every view,
// then crops each view at its mid-depth-aligned offset. The flight geometry
// keeps per-plane homographies translational, so mapping image corners gives
// the region exactly.
inline std::vector<CroppedTile> crop_units(const MultiViewUnit& unit, int tile_w, int tile_h,
                                           double interval) {
  const ViewRecord& ref = unit.views[1];
  const int w = ref.cam.width;
  const int h = ref.cam.height;
  if (tile_w <= 0 || tile_h <= 0 || tile_w % 2 || tile_h % 2)
    throw contract_error("crop_units: tile extents must be positive and even");
  if (tile_w > w || tile_h > h) throw contract_error("crop_units: tile larger than image");
  double d_lo, d_hi;
  detail::depth_range(ref.depth, d_lo, d_hi);
  d_lo = std::max(d_lo - interval, 1e-3);
  d_hi += interval;
  const double d_mid = 0.5 * (d_lo + d_hi);

  detail::Rect region{0, 0, static_cast<double>(w - 1), static_cast<double>(h - 1)};
  for (std::size_t v = 0; v < unit.views.size(); ++v) {
    if (v == 1) continue;
    const CameraModel& src = unit.views[v].cam;
    for (const double d : {d_lo, d_hi}) {
      const Eigen::Matrix3d hinv = sweep_homography(ref.cam, src, d).inverse();
      double x0 = 1e30, y0 = 1e30, x1 = -1e30, y1 = -1e30;
      for (const auto& [cx, cy] : {std::pair{0.0, 0.0},
                                   std::pair{static_cast<double>(src.width - 1), 0.0},
                                   std::pair{0.0, static_cast<double>(src.height - 1)},
                                   std::pair{static_cast<double>(src.width - 1),
                                             static_cast<double>(src.height - 1)}}) {
        const Eigen::Vector2d m = apply_homography(hinv, cx, cy);
        x0 = std::min(x0, m.x());
        y0 = std::min(y0, m.y());
        x1 = std::max(x1, m.x());
        y1 = std::max(y1, m.y());
      }
      region.x0 = std::max(region.x0, x0);
      region.y0 = std::max(region.y0, y0);
      region.x1 = std::min(region.x1, x1);
      region.y1 = std::min(region.y1, y1);
    }
  }
  if (region.x1 <= region.x0 || region.y1 <= region.y0)
    throw degenerate_error("crop_units: views share no overlap for unit " + unit.name);

  // Snap boundaries that are within numerical dust of an exact pixel so a
  // rectified region does not lose a whole tile row to a 1e-13 residue.
  const double snap = 1e-9;
  const int bx = static_cast<int>(std::ceil(region.x0 - snap));
  const int by = static_cast<int>(std::ceil(region.y0 - snap));
  const int avail_w = static_cast<int>(std::floor(region.x1 + snap)) - bx + 1;
  const int avail_h = static_cast<int>(std::floor(region.y1 + snap)) - by + 1;
  const int nx = avail_w / tile_w;
  const int ny = avail_h / tile_h;

  std::vector<CroppedTile> tiles;
  for (int ty = 0; ty < ny; ++ty) {
    for (int tx = 0; tx < nx; ++tx) {
      const int cx = bx + tx * tile_w;
      const int cy = by + ty * tile_h;
      CroppedTile tile;
      tile.unit = unit.name;
      tile.tile = static_cast<int>(tiles.size());
      bool ok = true;
      for (std::size_t v = 0; v < unit.views.size() && ok; ++v) {
        const ViewRecord& view = unit.views[v];
        int ox = cx, oy = cy;
        if (v != 1) {
          const Eigen::Matrix3d hm = sweep_homography(ref.cam, view.cam, d_mid);
          const Eigen::Vector2d m = apply_homography(hm, cx, cy);
          ox = static_cast<int>(std::lround(m.x()));
          oy = static_cast<int>(std::lround(m.y()));
        }
        if (ox < 0 || oy < 0 || ox + tile_w > view.cam.width || oy + tile_h > view.cam.height) {
          ok = false;
          break;
        }
        ImageU8 img;
        img.width = tile_w;
        img.height = tile_h;
        img.rgb.resize(static_cast<std::size_t>(tile_w) * tile_h * 3);
        Tensor<float> depth = Tensor<float>::uninit({tile_h, tile_w});
        std::vector<std::uint8_t> mask(static_cast<std::size_t>(tile_w) * tile_h);
        for (int y = 0; y < tile_h; ++y) {
          const std::size_t srow = (static_cast<std::size_t>(oy + y) * view.cam.width + ox);
          std::memcpy(img.rgb.data() + static_cast<std::size_t>(y) * tile_w * 3,
                      view.image.rgb.data() + srow * 3, static_cast<std::size_t>(tile_w) * 3);
          std::memcpy(depth.data() + static_cast<std::int64_t>(y) * tile_w,
                      view.depth.data() + srow, sizeof(float) * static_cast<std::size_t>(tile_w));
          std::memcpy(mask.data() + static_cast<std::size_t>(y) * tile_w,
                      view.fill_mask.data() + srow, static_cast<std::size_t>(tile_w));
        }
        CameraModel cam(view.cam.f, view.cam.x0 - ox, view.cam.y0 - oy, tile_w, tile_h,
                        view.cam.r, view.cam.c);
        tile.images.push_back(std::move(img));
        tile.depths.push_back(depth);
        tile.fill_masks.push_back(std::move(mask));
        tile.cams.push_back(cam);
        tile.plans.push_back(detail::plan_for(depth, interval));
      }
      if (ok) tiles.push_back(std::move(tile));
    }
  }
  return tiles;
}

}  // namespace skysweep
