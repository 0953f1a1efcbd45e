#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>

#include "f2d/camera.hpp"

namespace f2d {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix34d = Eigen::Matrix<double, 3, 4>;

inline Eigen::Matrix3d so3_hat(const Eigen::Vector3d& w) {
  Eigen::Matrix3d m;
  m << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return m;
}

/// Rodrigues formula, series expansion below 1e-8 rad.
inline Eigen::Matrix3d so3_exp(const Eigen::Vector3d& w) {
  const double theta_sq = w.squaredNorm();
  const Eigen::Matrix3d hat = so3_hat(w);
  double a, b;
  if (theta_sq < 1e-16) {
    a = 1.0 - theta_sq / 6.0;
    b = 0.5 - theta_sq / 24.0;
  } else {
    const double theta = std::sqrt(theta_sq);
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta_sq;
  }
  return Eigen::Matrix3d::Identity() + a * hat + b * hat * hat;
}

/// Inverse of so3_exp. Valid for rotation angles < pi; the angle is
/// recovered from atan2 of the skew and trace parts, which stays well
/// conditioned over the whole chart.
inline Eigen::Vector3d so3_log(const Eigen::Matrix3d& r) {
  const Eigen::Vector3d skew(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double sin_theta = 0.5 * skew.norm();
  const double cos_theta = 0.5 * (r.trace() - 1.0);
  const double theta = std::atan2(sin_theta, cos_theta);

  if (theta < 1e-8) return 0.5 * skew;  // w ~ skew/2 to first order

  if (sin_theta < 1e-6 && cos_theta < 0) {
    // Near pi the skew part vanishes; recover the axis from the symmetric part.
    const Eigen::Matrix3d sym = 0.5 * (r + r.transpose());
    Eigen::Vector3d axis;
    for (int i = 0; i < 3; ++i)
      axis[i] = std::sqrt(std::max(0.0, (sym(i, i) - cos_theta) / (1.0 - cos_theta)));
    // Fix relative signs from the largest component.
    int k = 0;
    if (axis[1] > axis[k]) k = 1;
    if (axis[2] > axis[k]) k = 2;
    for (int i = 0; i < 3; ++i) {
      if (i == k) continue;
      if (sym(k, i) < 0) axis[i] = -axis[i];
    }
    // Overall sign from the (tiny but usually nonzero) skew part.
    if (axis.dot(skew) < 0) axis = -axis;
    return theta * axis.normalized();
  }

  return (0.5 * theta / sin_theta) * skew;
}

/// Right Jacobian of SO(3): exp(w + d) ~ exp(w) * exp(Jr(w) d).
inline Eigen::Matrix3d so3_right_jacobian(const Eigen::Vector3d& w) {
  const double theta_sq = w.squaredNorm();
  const Eigen::Matrix3d hat = so3_hat(w);
  double c1, c2;
  if (theta_sq < 1e-12) {
    c1 = 0.5 - theta_sq / 24.0;
    c2 = 1.0 / 6.0 - theta_sq / 120.0;
  } else {
    const double theta = std::sqrt(theta_sq);
    c1 = (1.0 - std::cos(theta)) / theta_sq;
    c2 = (theta - std::sin(theta)) / (theta_sq * theta);
  }
  return Eigen::Matrix3d::Identity() - c1 * hat + c2 * hat * hat;
}

/// Geodesic distance between two rotations, in radians.
inline double rotation_angle_between(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  return so3_log(a.transpose() * b).norm();
}

/// Rigid transform from the target camera frame to a source camera frame.
/// Exposes a 6-vector chart (axis-angle rotation, then translation) used by
/// the pose optimizer.
struct RelativePose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  RelativePose() = default;
  RelativePose(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) : rotation(r), translation(t) {}

  Eigen::Vector3d apply(const Eigen::Vector3d& x) const { return rotation * x + translation; }

  RelativePose inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }

  static RelativePose from_chart(const Vector6d& x) {
    return {so3_exp(x.head<3>()), x.tail<3>()};
  }

  Vector6d to_chart() const {
    Vector6d x;
    x.head<3>() = so3_log(rotation);
    x.tail<3>() = translation;
    return x;
  }

  /// K_s * [R | t], the source camera matrix with the target frame as world.
  Matrix34d camera_matrix(const Intrinsics& k_source) const {
    Matrix34d m;
    m.leftCols<3>() = k_source.matrix() * rotation;
    m.col(3) = k_source.matrix() * translation;
    return m;
  }

  /// Orthonormality defect max(|R^T R - I|); 0 for a clean rotation.
  double rotation_defect() const {
    return (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
        .cwiseAbs()
        .maxCoeff();
  }
};

}  // namespace f2d
