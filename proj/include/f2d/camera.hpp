#pragma once

#include <Eigen/Core>
#include <cmath>

#include "f2d/errors.hpp"

namespace f2d {

/// Pinhole camera intrinsics (pixels). The implied 3x3 matrix is
///   [fx  0 cx]
///   [ 0 fy cy]
///   [ 0  0  1]
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  Intrinsics() = default;
  Intrinsics(double fx, double fy, double cx, double cy) : fx(fx), fy(fy), cx(cx), cy(cy) {}

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d k;
    k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
    return k;
  }

  /// K^-1 * [u, v, 1]: the viewing ray with unit z.
  Eigen::Vector3d unproject(double u, double v) const {
    return {(u - cx) / fx, (v - cy) / fy, 1.0};
  }

  /// Perspective projection of a camera-frame point (z must be nonzero).
  Eigen::Vector2d project(const Eigen::Vector3d& x) const {
    return {fx * x.x() / x.z() + cx, fy * x.y() / x.z() + cy};
  }

  bool valid() const {
    return fx > 0 && fy > 0 && std::isfinite(fx) && std::isfinite(fy) && std::isfinite(cx) &&
           std::isfinite(cy);
  }

  void validate() const {
    if (!valid()) throw DimensionMismatch("intrinsics: focal lengths must be positive and finite");
  }
};

}  // namespace f2d
