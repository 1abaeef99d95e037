#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "skysweep/common/errors.hpp"
#include "skysweep/geometry/camera.hpp"

namespace skysweep {

struct FlightConfig {
  int image_width = 512;
  int image_height = 256;
  double flying_height = 64.0;  // meters above mean ground
  double gsd = 0.1;             // ground sampling distance, meters/pixel
  double heading_overlap = 0.9;
  double side_overlap = 0.8;
  int strips = 4;
  int images_per_strip = 10;
  double margin = 2.0;  // scene ground beyond the outermost footprints
};

// Regular nadir grid: strips run along +X (heading, image u axis), adjacent
// strips are offset along +Y. All rotations are identical, so consecutive
// same-strip images form rectified pairs with baseline along u.
struct FlightPlan {
  double f = 0;
  int width = 0, height = 0;
  double footprint_x = 0, footprint_y = 0;
  double dx = 0, dy = 0;
  double x_start = 0, y_start = 0;
  double cam_z = 0;
  double flying_height = 0;
  int strips = 0, images_per_strip = 0;
  double margin = 0;

  double extent_x() const { return 2 * (margin + footprint_x / 2) + (images_per_strip - 1) * dx; }
  double extent_y() const { return 2 * (margin + footprint_y / 2) + (strips - 1) * dy; }

  Eigen::Vector3d center(int strip, int img) const {
    return {x_start + img * dx, y_start + strip * dy, cam_z};
  }

  CameraModel camera(int strip, int img) const {
    if (strip < 0 || strip >= strips || img < 0 || img >= images_per_strip)
      throw contract_error("FlightPlan::camera: index out of range");
    return CameraModel(f, (width - 1) / 2.0, (height - 1) / 2.0, width, height,
                       rotation_from_angles(0, 0, 0), center(strip, img));
  }
};

inline FlightPlan plan_flight(const FlightConfig& cfg, double ground_z = 0.0) {
  if (!(cfg.heading_overlap > 0 && cfg.heading_overlap < 1))
    throw contract_error("plan_flight: heading overlap must be in (0,1)");
  if (!(cfg.side_overlap > 0 && cfg.side_overlap < 1))
    throw contract_error("plan_flight: side overlap must be in (0,1)");
  if (cfg.image_width <= 0 || cfg.image_height <= 0)
    throw contract_error("plan_flight: image extents must be positive");
  if (!(cfg.flying_height > 0)) throw contract_error("plan_flight: height must be positive");
  if (!(cfg.gsd > 0)) throw contract_error("plan_flight: gsd must be positive");
  if (cfg.strips < 1 || cfg.images_per_strip < 1)
    throw contract_error("plan_flight: need at least one strip and image");
  FlightPlan p;
  p.f = cfg.flying_height / cfg.gsd;
  p.width = cfg.image_width;
  p.height = cfg.image_height;
  p.footprint_x = cfg.image_width * cfg.gsd;
  p.footprint_y = cfg.image_height * cfg.gsd;
  p.dx = p.footprint_x * (1 - cfg.heading_overlap);
  p.dy = p.footprint_y * (1 - cfg.side_overlap);
  p.margin = cfg.margin;
  p.x_start = cfg.margin + p.footprint_x / 2;
  p.y_start = cfg.margin + p.footprint_y / 2;
  p.cam_z = ground_z + cfg.flying_height;
  p.flying_height = cfg.flying_height;
  p.strips = cfg.strips;
  p.images_per_strip = cfg.images_per_strip;
  return p;
}

}  // namespace skysweep
