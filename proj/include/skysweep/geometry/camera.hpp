#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "skysweep/common/errors.hpp"

namespace skysweep {

// Axis conventions, used everywhere: camera x right, y down, z forward
// (right-handed); world X east, Y north, Z up. A nadir camera therefore has
// rotation diag(1,-1,-1): it keeps east, flips north onto image-down and
// looks along -Z.
inline Eigen::Matrix3d nadir_rotation() {
  Eigen::Matrix3d r;
  r << 1, 0, 0, 0, -1, 0, 0, 0, -1;
  return r;
}

// Photogrammetric phi-omega-kappa angles applied on top of the nadir base.
inline Eigen::Matrix3d rotation_from_angles(double phi, double omega, double kappa) {
  const Eigen::Matrix3d rz = Eigen::AngleAxisd(kappa, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const Eigen::Matrix3d rx = Eigen::AngleAxisd(omega, Eigen::Vector3d::UnitX()).toRotationMatrix();
  const Eigen::Matrix3d ry = Eigen::AngleAxisd(phi, Eigen::Vector3d::UnitY()).toRotationMatrix();
  return rz * rx * ry * nadir_rotation();
}

struct Projection {
  double u = 0, v = 0, depth = 0;
};

// Pinhole camera. R maps world to camera; C is the camera center in world
// coordinates, so p_cam = R (X - C).
struct CameraModel {
  double f = 1, x0 = 0, y0 = 0;
  int width = 1, height = 1;
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  Eigen::Vector3d c = Eigen::Vector3d::Zero();

  CameraModel() = default;
  CameraModel(double f_, double x0_, double y0_, int width_, int height_,
              const Eigen::Matrix3d& r_, const Eigen::Vector3d& c_)
      : f(f_), x0(x0_), y0(y0_), width(width_), height(height_), r(r_), c(c_) {
    validate();
  }

  void validate() const {
    if (!(f > 0)) throw contract_error("CameraModel: focal length must be positive");
    if (width <= 0 || height <= 0) throw contract_error("CameraModel: extents must be positive");
    const double ortho = (r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (!(ortho < 1e-9))
      throw contract_error("CameraModel: rotation not orthonormal, |RR^T - I| = " +
                           std::to_string(ortho));
    if (!(std::abs(r.determinant() - 1.0) < 1e-9))
      throw contract_error("CameraModel: rotation determinant is " +
                           std::to_string(r.determinant()) + ", expected +1");
  }

  Eigen::Vector3d to_camera(const Eigen::Vector3d& x) const { return r * (x - c); }

  // False when the point is on or behind the principal plane.
  bool try_project(const Eigen::Vector3d& x, Projection& out) const {
    const Eigen::Vector3d p = to_camera(x);
    if (!(p.z() > 0)) return false;
    out.u = f * p.x() / p.z() + x0;
    out.v = f * p.y() / p.z() + y0;
    out.depth = p.z();
    return true;
  }

  Projection project(const Eigen::Vector3d& x) const {
    Projection out;
    if (!try_project(x, out))
      throw degenerate_error("project: point behind camera (depth " +
                             std::to_string(to_camera(x).z()) + ")");
    return out;
  }

  Eigen::Vector3d unproject(double u, double v, double depth) const {
    if (!(depth > 0)) throw contract_error("unproject: depth must be positive");
    const Eigen::Vector3d p((u - x0) / f * depth, (v - y0) / f * depth, depth);
    return r.transpose() * p + c;
  }
};

// Fronto-parallel sweep planes: plane i sits at reference depth
// d_min + i*interval.
struct DepthPlan {
  double d_min = 1;
  double interval = 1;
  int count = 2;

  DepthPlan() = default;
  DepthPlan(double d_min_, double interval_, int count_)
      : d_min(d_min_), interval(interval_), count(count_) {
    validate();
  }

  void validate() const {
    if (!(d_min > 0)) throw contract_error("DepthPlan: d_min must be positive");
    if (!(interval > 0)) throw contract_error("DepthPlan: interval must be positive");
    if (count < 2) throw contract_error("DepthPlan: need at least two samples");
  }

  double depth_of(int i) const { return d_min + i * interval; }
};

inline std::vector<double> depth_planes(const DepthPlan& plan) {
  plan.validate();
  std::vector<double> out(static_cast<std::size_t>(plan.count));
  for (int i = 0; i < plan.count; ++i) out[static_cast<std::size_t>(i)] = plan.depth_of(i);
  return out;
}

}  // namespace skysweep
