#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "skysweep/common/errors.hpp"
#include "skysweep/core/tensor.hpp"
#include "skysweep/geometry/camera.hpp"
#include "skysweep/io/png_io.hpp"

namespace skysweep {

struct CloudPoint {
  double x = 0, y = 0, z = 0;
  std::uint8_t r = 0, g = 0, b = 0;
};

// Unprojects every valid depth pixel of one view into world space, colored
// from the matching image. No deduplication or visibility filtering.
inline void fuse_view(const Tensor<float>& depth, const CameraModel& cam, const ImageU8& image,
                      std::vector<CloudPoint>& out) {
  const Shape& s = depth.shape();
  if (s.rank != 2) throw contract_error("fuse_view: depth must be [H,W]");
  if (s.extent[0] != cam.height || s.extent[1] != cam.width)
    throw contract_error("fuse_view: depth extents " + s.str() + " do not match the camera");
  if (image.width != cam.width || image.height != cam.height)
    throw contract_error("fuse_view: image extents do not match the camera");
  const float* d = depth.data();
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      const float z = d[static_cast<std::int64_t>(v) * cam.width + u];
      if (!(z > 0)) continue;
      const Eigen::Vector3d p = cam.unproject(u, v, z);
      if (!p.allFinite()) throw numeric_error("fuse_view: non-finite point");
      const std::size_t px = (static_cast<std::size_t>(v) * cam.width + u) * 3;
      out.push_back({p.x(), p.y(), p.z(), image.rgb[px], image.rgb[px + 1], image.rgb[px + 2]});
    }
  }
}

inline std::vector<CloudPoint> fuse_points(const std::vector<Tensor<float>>& depths,
                                           const std::vector<CameraModel>& cams,
                                           const std::vector<ImageU8>& images) {
  if (depths.size() != cams.size() || depths.size() != images.size())
    throw contract_error("fuse_points: depth, camera, and image counts must match");
  std::vector<CloudPoint> out;
  for (std::size_t i = 0; i < depths.size(); ++i) fuse_view(depths[i], cams[i], images[i], out);
  return out;
}

// ASCII cloud: "X Y Z R G B" per line, coordinates with six decimals.
inline void write_point_cloud(const std::string& path, const std::vector<CloudPoint>& cloud) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw format_error("write_point_cloud: cannot open " + path);
  char buf[128];
  for (const CloudPoint& p : cloud) {
    std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f %d %d %d\n", p.x, p.y, p.z, p.r, p.g, p.b);
    os << buf;
  }
  if (!os) throw format_error("write_point_cloud: write failed for " + path);
}

inline std::vector<CloudPoint> read_point_cloud(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw format_error("read_point_cloud: cannot open " + path);
  std::vector<CloudPoint> cloud;
  double x, y, z;
  int r, g, b;
  while (is >> x >> y >> z >> r >> g >> b) {
    if (r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255)
      throw format_error("read_point_cloud: color out of range in " + path);
    cloud.push_back({x, y, z, static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                     static_cast<std::uint8_t>(b)});
  }
  if (!is.eof()) throw format_error("read_point_cloud: malformed line in " + path);
  return cloud;
}

}  // namespace skysweep
