#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

#include "skysweep/common/errors.hpp"
#include "skysweep/geometry/camera.hpp"

namespace skysweep {

inline Eigen::Matrix3d intrinsic_matrix(const CameraModel& cam) {
  Eigen::Matrix3d k;
  k << cam.f, 0, cam.x0, 0, cam.f, cam.y0, 0, 0, 1;
  return k;
}

inline Eigen::Matrix3d inverse_intrinsic_matrix(const CameraModel& cam) {
  Eigen::Matrix3d k;
  k << 1 / cam.f, 0, -cam.x0 / cam.f, 0, 1 / cam.f, -cam.y0 / cam.f, 0, 0, 1;
  return k;
}

// Homography induced by the plane z_ref = d (normal along the reference
// optical axis), mapping reference pixels to source pixels:
//   H = K_src (R_rel + t e3^T / d) K_ref^-1,  R_rel = R_src R_ref^T,
//   t = R_src (C_ref - C_src).
// d = +infinity yields the infinite homography. The plane must not pass
// through the source camera center. Scale-normalized so H(2,2) = 1 when it
// is nonzero.
inline Eigen::Matrix3d sweep_homography(const CameraModel& ref, const CameraModel& src,
                                        double d) {
  if (std::isnan(d) || !(d > 0)) throw contract_error("sweep_homography: depth must be positive");
  const Eigen::Matrix3d r_rel = src.r * ref.r.transpose();
  Eigen::Matrix3d mid = r_rel;
  if (!std::isinf(d)) {
    const Eigen::Vector3d t = src.r * (ref.c - src.c);
    mid.col(2) += t / d;
    // mid is singular exactly when the plane contains the source center,
    // i.e. when the source center's depth in the reference frame equals d.
    const double src_depth_in_ref = (ref.r * (src.c - ref.c)).z();
    if (std::abs(1.0 - src_depth_in_ref / d) < 1e-9)
      throw degenerate_error("sweep_homography: plane at d=" + std::to_string(d) +
                             " passes through the source camera center");
  }
  Eigen::Matrix3d h = intrinsic_matrix(src) * mid * inverse_intrinsic_matrix(ref);
  if (std::abs(h(2, 2)) > 1e-12 * h.cwiseAbs().maxCoeff()) h /= h(2, 2);
  return h;
}

// Maps a reference pixel through H. Degenerate pixels (mapped to infinity)
// come back nonfinite; warping treats them as out of bounds.
inline Eigen::Vector2d apply_homography(const Eigen::Matrix3d& h, double u, double v) {
  const Eigen::Vector3d p = h * Eigen::Vector3d(u, v, 1.0);
  return {p.x() / p.z(), p.y() / p.z()};
}

}  // namespace skysweep
