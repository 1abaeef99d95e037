#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "skysweep/common/errors.hpp"
#include "skysweep/geometry/camera.hpp"

namespace skysweep {

// Camera text file, one per view:
//   line 1: "extrinsic"
//   line 2: Xs Ys Zs
//   lines 3-5: rows of R (world-to-camera)
//   line 6: "intrinsic"
//   line 7: f x0 y0
//   line 8: W H
//   line 9: d_min interval D
// Plain decimal, space-separated, 12 significant digits.
inline void write_camera_txt(const std::string& path, const CameraModel& cam,
                             const DepthPlan& plan) {
  std::ofstream os(path);
  if (!os) throw format_error("write_camera_txt: cannot open " + path);
  char buf[160];
  os << "extrinsic\n";
  std::snprintf(buf, sizeof buf, "%.12g %.12g %.12g\n", cam.c.x(), cam.c.y(), cam.c.z());
  os << buf;
  for (int row = 0; row < 3; ++row) {
    std::snprintf(buf, sizeof buf, "%.12g %.12g %.12g\n", cam.r(row, 0), cam.r(row, 1),
                  cam.r(row, 2));
    os << buf;
  }
  os << "intrinsic\n";
  std::snprintf(buf, sizeof buf, "%.12g %.12g %.12g\n", cam.f, cam.x0, cam.y0);
  os << buf;
  os << cam.width << ' ' << cam.height << '\n';
  std::snprintf(buf, sizeof buf, "%.12g %.12g %d\n", plan.d_min, plan.interval, plan.count);
  os << buf;
  if (!os) throw format_error("write_camera_txt: write failed: " + path);
}

struct CameraFile {
  CameraModel cam;
  DepthPlan plan;
};

inline CameraFile read_camera_txt(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw format_error("read_camera_txt: cannot open " + path);
  auto next_line = [&](const char* what) {
    std::string line;
    if (!std::getline(is, line))
      throw format_error("read_camera_txt: " + path + ": missing " + what);
    return line;
  };
  if (next_line("header") != "extrinsic")
    throw format_error("read_camera_txt: " + path + ": expected 'extrinsic' on line 1");
  Eigen::Vector3d c;
  {
    std::istringstream ss(next_line("camera center"));
    if (!(ss >> c.x() >> c.y() >> c.z()))
      throw format_error("read_camera_txt: " + path + ": bad camera center line");
  }
  Eigen::Matrix3d r;
  for (int row = 0; row < 3; ++row) {
    std::istringstream ss(next_line("rotation row"));
    if (!(ss >> r(row, 0) >> r(row, 1) >> r(row, 2)))
      throw format_error("read_camera_txt: " + path + ": bad rotation row " +
                         std::to_string(row + 1));
  }
  if (next_line("header") != "intrinsic")
    throw format_error("read_camera_txt: " + path + ": expected 'intrinsic' on line 6");
  double f = 0, x0 = 0, y0 = 0;
  {
    std::istringstream ss(next_line("intrinsics"));
    if (!(ss >> f >> x0 >> y0))
      throw format_error("read_camera_txt: " + path + ": bad intrinsics line");
  }
  int w = 0, h = 0;
  {
    std::istringstream ss(next_line("image size"));
    if (!(ss >> w >> h)) throw format_error("read_camera_txt: " + path + ": bad image size line");
  }
  double d_min = 0, interval = 0;
  int count = 0;
  {
    std::istringstream ss(next_line("depth plan"));
    if (!(ss >> d_min >> interval >> count))
      throw format_error("read_camera_txt: " + path + ": bad depth plan line");
  }
  CameraFile out;
  try {
    out.cam = CameraModel(f, x0, y0, w, h, r, c);
    out.plan = DepthPlan(d_min, interval, count);
  } catch (const contract_error& e) {
    throw format_error("read_camera_txt: " + path + ": " + e.what());
  }
  return out;
}

}  // namespace skysweep
