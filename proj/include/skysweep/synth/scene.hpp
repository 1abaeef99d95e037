#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "skysweep/common/errors.hpp"
#include "skysweep/common/rng.hpp"

namespace skysweep {

struct SceneConfig {
  double extent_x = 100.0;  // meters, scene spans [0,extent_x] x [0,extent_y]
  double extent_y = 45.0;
  double grid = 0.05;  // surface sampling cell size g, meters
  double terrain_amplitude = 0.3;
  int buildings = 12;
  double building_min_height = 2.0;
  double building_max_height = 6.0;
  double building_min_side = 3.0;
  double building_max_side = 8.0;
  std::uint64_t seed = 7;
};

struct Box {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double roof_z = 0;
  int id = 0;

  bool contains(double x, double y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

struct ColoredPoint {
  float x = 0, y = 0, z = 0;
  std::uint8_t r = 0, g = 0, b = 0;
};

namespace detail {

inline std::uint8_t clamp_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

}  // namespace detail

// Procedural terrain + extruded boxes, sampled into one colored point per
// g-sized surface cell. Texture is a pure function of the cell position and
// the seed, so every view observes identical colors.
class SceneModel {
 public:
  explicit SceneModel(const SceneConfig& cfg) : cfg_(cfg) {
    if (!(cfg.extent_x > 0) || !(cfg.extent_y > 0))
      throw contract_error("SceneModel: extents must be positive");
    if (!(cfg.grid > 0)) throw contract_error("SceneModel: grid must be positive");
    if (cfg.buildings < 0) throw contract_error("SceneModel: negative building count");
    Rng rng(cfg.seed);
    build_terrain(rng.fork(1));
    place_buildings(rng.fork(2));
    sample_points();
  }

  const SceneConfig& config() const { return cfg_; }
  const std::vector<ColoredPoint>& points() const { return points_; }
  const std::vector<Box>& boxes() const { return boxes_; }

  // Smooth bilinear terrain over a coarse control grid.
  double terrain(double x, double y) const {
    if (cfg_.terrain_amplitude == 0) return 0.0;
    const double gx = std::clamp(x / cfg_.extent_x, 0.0, 1.0) * (kCtrl - 1);
    const double gy = std::clamp(y / cfg_.extent_y, 0.0, 1.0) * (kCtrl - 1);
    const int ix = std::min(static_cast<int>(gx), kCtrl - 2);
    const int iy = std::min(static_cast<int>(gy), kCtrl - 2);
    const double ax = gx - ix;
    const double ay = gy - iy;
    const double v00 = ctrl_[iy * kCtrl + ix];
    const double v10 = ctrl_[iy * kCtrl + ix + 1];
    const double v01 = ctrl_[(iy + 1) * kCtrl + ix];
    const double v11 = ctrl_[(iy + 1) * kCtrl + ix + 1];
    return (1 - ax) * (1 - ay) * v00 + ax * (1 - ay) * v10 + (1 - ax) * ay * v01 + ax * ay * v11;
  }

  double max_elevation() const { return max_elevation_; }

 private:
  static constexpr int kCtrl = 9;

  void build_terrain(Rng rng) {
    ctrl_.assign(kCtrl * kCtrl, 0.0);
    for (double& v : ctrl_) v = rng.uniform(-cfg_.terrain_amplitude, cfg_.terrain_amplitude);
  }

  void place_buildings(Rng rng) {
    const double margin = cfg_.building_max_side;
    for (int id = 0; id < cfg_.buildings; ++id) {
      bool placed = false;
      for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
        const double w = rng.uniform(cfg_.building_min_side, cfg_.building_max_side);
        const double h = rng.uniform(cfg_.building_min_side, cfg_.building_max_side);
        if (cfg_.extent_x < w + 2 * margin || cfg_.extent_y < h + 2 * margin) break;
        Box b;
        b.x0 = rng.uniform(margin, cfg_.extent_x - margin - w);
        b.y0 = rng.uniform(margin, cfg_.extent_y - margin - h);
        b.x1 = b.x0 + w;
        b.y1 = b.y0 + h;
        b.id = id;
        bool overlaps = false;
        for (const Box& o : boxes_)
          if (b.x0 < o.x1 + 1 && o.x0 < b.x1 + 1 && b.y0 < o.y1 + 1 && o.y0 < b.y1 + 1) {
            overlaps = true;
            break;
          }
        if (overlaps) continue;
        const double base = terrain(0.5 * (b.x0 + b.x1), 0.5 * (b.y0 + b.y1));
        b.roof_z = base + rng.uniform(cfg_.building_min_height, cfg_.building_max_height);
        boxes_.push_back(b);
        placed = true;
      }
    }
  }

  const Box* box_at(double x, double y) const {
    for (const Box& b : boxes_)
      if (b.contains(x, y)) return &b;
    return nullptr;
  }

  // Texture lanes packed from one hash; base colors per surface kind.
  void shade(int kind, int id, std::int64_t ix, std::int64_t iy, std::int64_t iz,
             std::uint8_t& r, std::uint8_t& g, std::uint8_t& b) const {
    const std::uint64_t h = hash_u64(
        cfg_.seed ^ hash_u64(static_cast<std::uint64_t>(ix) * 0x9e3779b97f4a7c15ull ^
                             hash_u64(static_cast<std::uint64_t>(iy) * 0xbf58476d1ce4e5b9ull ^
                                      hash_u64(static_cast<std::uint64_t>(iz) +
                                               (static_cast<std::uint64_t>(kind) << 32) +
                                               (static_cast<std::uint64_t>(id) << 40)))));
    const double n0 = static_cast<double>(h & 0xffff) / 65535.0 - 0.5;
    const double n1 = static_cast<double>((h >> 16) & 0xffff) / 65535.0 - 0.5;
    const double n2 = static_cast<double>((h >> 32) & 0xffff) / 65535.0 - 0.5;
    // Coarse 4 m patches keep low-frequency structure under the pixel noise.
    const double patch =
        hash_unit(cfg_.seed ^ hash_u64(static_cast<std::uint64_t>(ix >> 6) * 31 +
                                       static_cast<std::uint64_t>(iy >> 6) * 131071)) -
        0.5;
    double cr, cg, cb, noise;
    switch (kind) {
      case 0:  // ground
        cr = 96 + 36 * patch;
        cg = 112 + 30 * patch;
        cb = 70;
        noise = 90;
        break;
      case 1: {  // roof, palette keyed by building id
        static const int palette[4][3] = {
            {180, 86, 74}, {100, 100, 108}, {146, 114, 92}, {92, 84, 124}};
        const int* p = palette[hash_u64(cfg_.seed ^ (0x517cc1b7ull + id)) & 3];
        cr = p[0];
        cg = p[1];
        cb = p[2];
        noise = 70;
        break;
      }
      default:  // wall
        cr = 150 + 16 * patch;
        cg = 128;
        cb = 108;
        noise = 80;
        break;
    }
    r = detail::clamp_u8(cr + noise * n0);
    g = detail::clamp_u8(cg + noise * n1);
    b = detail::clamp_u8(cb + noise * n2);
  }

  void push_point(int kind, int id, double x, double y, double z) {
    const double g = cfg_.grid;
    ColoredPoint p;
    p.x = static_cast<float>(x);
    p.y = static_cast<float>(y);
    p.z = static_cast<float>(z);
    shade(kind, id, static_cast<std::int64_t>(std::floor(x / g)),
          static_cast<std::int64_t>(std::floor(y / g)),
          static_cast<std::int64_t>(std::floor(z / g)), p.r, p.g, p.b);
    points_.push_back(p);
    max_elevation_ = std::max(max_elevation_, z);
  }

  void sample_points() {
    const double g = cfg_.grid;
    const int nx = static_cast<int>(std::ceil(cfg_.extent_x / g));
    const int ny = static_cast<int>(std::ceil(cfg_.extent_y / g));
    points_.reserve(static_cast<std::size_t>(nx) * ny);
    for (int iy = 0; iy < ny; ++iy) {
      const double y = (iy + 0.5) * g;
      for (int ix = 0; ix < nx; ++ix) {
        const double x = (ix + 0.5) * g;
        const Box* b = box_at(x, y);
        if (b)
          push_point(1, b->id, x, y, b->roof_z);
        else
          push_point(0, 0, x, y, terrain(x, y));
      }
    }
    for (const Box& b : boxes_) {
      // Four wall faces, one point per g x g cell from local ground to roof.
      auto column = [&](double x, double y) {
        const double zb = terrain(x, y);
        for (double z = zb + 0.5 * g; z < b.roof_z; z += g) push_point(2, b.id, x, y, z);
      };
      for (double x = b.x0 + 0.5 * g; x < b.x1; x += g) {
        column(x, b.y0);
        column(x, b.y1 - 1e-9);
      }
      for (double y = b.y0 + 0.5 * g; y < b.y1; y += g) {
        column(b.x0, y);
        column(b.x1 - 1e-9, y);
      }
    }
    if (points_.empty()) throw contract_error("SceneModel: empty scene");
  }

  SceneConfig cfg_;
  std::vector<double> ctrl_;
  std::vector<Box> boxes_;
  std::vector<ColoredPoint> points_;
  double max_elevation_ = -1e30;
};

}  // namespace skysweep
