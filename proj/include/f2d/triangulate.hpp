#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <optional>

#include "f2d/camera.hpp"
#include "f2d/flow.hpp"
#include "f2d/image.hpp"
#include "f2d/se3.hpp"

namespace f2d {

/// Reprojection-error-to-confidence conversion: C = exp(-eps/sigma).
struct ConfidenceParams {
  double sigma = 20.0;  // pixels

  void validate() const {
    if (!(sigma > 0)) throw DimensionMismatch("confidence params: sigma must be positive");
  }
};

/// Below this m^T m the viewing ray has no usable parallax (epipole or pure
/// rotation) and the closed-form depth is numerically meaningless.
inline constexpr double kDegenerateRayTol = 1e-12;

struct PixelTriangulation {
  double depth;     // closed-form depth in the target frame, meters; may be negative
  double residual;  // reprojection error at that depth, pixels
};

/// Per-pixel depth proposal with its confidence map. positive_mask marks
/// pixels with positive depth, valid flow, and a non-degenerate ray;
/// confidence is zero everywhere else.
struct DepthProposal {
  Image<double> depth;
  Image<double> confidence;
  Image<uint8_t> positive_mask;

  DepthProposal() = default;
  DepthProposal(int width, int height)
      : depth(width, height, 0.0),
        confidence(width, height, 0.0),
        positive_mask(width, height, 0) {}

  int width() const { return depth.width(); }
  int height() const { return depth.height(); }
};

namespace detail {

/// One-pixel closed-form solve. With a = M'_{1:3,1:3} K^-1 p and
/// b = M'_{1:3,4}, the source projection of the depth-d point is
/// phi(d a + b) and the residual against p' factors as (d m - n) / w.
struct PixelSolve {
  Eigen::Vector2d m, n;
  double mm = 0;                     // m^T m
  double d = 0;                      // optimal depth
  double w = 0;                      // projective depth in the source view
  Eigen::Vector2d rho{0, 0};         // residual vector at d
  double eps = 0;                    // |rho|
  bool degenerate = false;
};

inline PixelSolve solve_pixel(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                              const Eigen::Vector2d& p_prime, double tol) {
  PixelSolve s;
  s.m = a.head<2>() - a.z() * p_prime;
  s.n = b.z() * p_prime - b.head<2>();
  s.mm = s.m.squaredNorm();
  if (!(s.mm >= tol)) {  // also catches NaN
    s.degenerate = true;
    s.eps = std::numeric_limits<double>::infinity();
    return s;
  }
  s.d = s.m.dot(s.n) / s.mm;
  s.w = s.d * a.z() + b.z();
  s.rho = (s.d * s.m - s.n) / s.w;
  s.eps = s.rho.norm();
  if (!std::isfinite(s.eps)) s.eps = std::numeric_limits<double>::infinity();
  return s;
}

}  // namespace detail

/// Closed-form optimal depth for one correspondence p <-> p' under the
/// source camera matrix M' (= K_s [R | t] with the target frame as world).
/// Returns nullopt when the ray is degenerate (no parallax at this pixel).
inline std::optional<PixelTriangulation> triangulate_pixel(
    const Eigen::Vector2d& p, const Eigen::Vector2d& p_prime, const Intrinsics& k_target,
    const Matrix34d& m_prime, double tol = kDegenerateRayTol) {
  const Eigen::Vector3d q = k_target.unproject(p.x(), p.y());
  const Eigen::Vector3d a = m_prime.leftCols<3>() * q;
  const Eigen::Vector3d b = m_prime.col(3);
  const detail::PixelSolve s = detail::solve_pixel(a, b, p_prime, tol);
  if (s.degenerate) return std::nullopt;
  return PixelTriangulation{s.d, s.eps};
}

/// Dense per-pixel triangulation of a flow field: the flow-to-depth layer.
/// Confidence is exp(-eps/sigma) on the positive mask and zero elsewhere.
inline DepthProposal flow_to_depth(const FlowField& flow, const Intrinsics& k_target,
                                   const RelativePose& pose, const Intrinsics& k_source,
                                   const ConfidenceParams& params = {}) {
  k_target.validate();
  k_source.validate();
  params.validate();
  require_same_size(flow.du, flow.dv, "flow_to_depth");
  require_same_size(flow.du, flow.valid, "flow_to_depth");

  const int w = flow.width(), h = flow.height();
  DepthProposal out(w, h);

  const Eigen::Matrix3d a_mat = k_source.matrix();
  const Eigen::Matrix3d rot = pose.rotation;
  const Eigen::Vector3d b = a_mat * pose.translation;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!flow.valid(x, y)) continue;
      const Eigen::Vector3d q = k_target.unproject(x, y);
      const Eigen::Vector2d p_prime(x + flow.du(x, y), y + flow.dv(x, y));
      const Eigen::Vector3d a = a_mat * (rot * q);
      const detail::PixelSolve s = detail::solve_pixel(a, b, p_prime, kDegenerateRayTol);
      if (s.degenerate) continue;
      out.depth(x, y) = s.d;
      if (s.d > 0) {
        out.positive_mask(x, y) = 1;
        out.confidence(x, y) = std::exp(-s.eps / params.sigma);
      }
    }
  }
  return out;
}

inline DepthProposal flow_to_depth(const FlowField& flow, const Intrinsics& k_target,
                                   const RelativePose& pose,
                                   const ConfidenceParams& params = {}) {
  return flow_to_depth(flow, k_target, pose, k_target, params);
}

/// Sum of the confidence map over the positive-depth set (the pose-refinement
/// objective), with an optional analytic gradient with respect to the pose
/// chart (axis-angle, translation). The positive-depth mask is treated as
/// fixed at the evaluation pose; pixels at the eps = 0 kink and pixels whose
/// confidence underflows contribute zero gradient. Accumulation is sequential
/// in row-major order, so the result does not depend on any partitioning.
inline double summed_confidence(const FlowField& flow, const Intrinsics& k_target,
                                const RelativePose& pose, const Intrinsics& k_source,
                                const ConfidenceParams& params, Vector6d* grad = nullptr) {
  k_target.validate();
  k_source.validate();
  params.validate();
  require_same_size(flow.du, flow.dv, "summed_confidence");
  require_same_size(flow.du, flow.valid, "summed_confidence");

  const Eigen::Matrix3d a_mat = k_source.matrix();
  const Eigen::Matrix3d rot = pose.rotation;
  const Eigen::Vector3d b = a_mat * pose.translation;
  const double sigma = params.sigma;

  // Pose-constant pieces of the chain rule: d(R q)/d omega = -[R q]x (R Jr).
  Eigen::Matrix3d rot_jr;
  Eigen::Matrix<double, 1, 3> db3_dt;
  if (grad) {
    grad->setZero();
    rot_jr = rot * so3_right_jacobian(so3_log(rot));
    db3_dt = a_mat.row(2);
  }

  double total = 0.0;
  for (int y = 0; y < flow.height(); ++y) {
    for (int x = 0; x < flow.width(); ++x) {
      if (!flow.valid(x, y)) continue;
      const Eigen::Vector3d q = k_target.unproject(x, y);
      const Eigen::Vector2d p_prime(x + flow.du(x, y), y + flow.dv(x, y));
      const Eigen::Vector3d u3 = rot * q;
      const Eigen::Vector3d a = a_mat * u3;
      const detail::PixelSolve s = detail::solve_pixel(a, b, p_prime, kDegenerateRayTol);
      if (s.degenerate || !(s.d > 0)) continue;
      const double conf = std::exp(-s.eps / sigma);
      total += conf;

      if (!grad || conf <= 0.0 || s.eps <= 0.0 || !std::isfinite(s.eps)) continue;

      const Eigen::Matrix3d da_dw = -a_mat * so3_hat(u3) * rot_jr;
      const Eigen::Matrix<double, 2, 3> dm_dw =
          da_dw.topRows<2>() - p_prime * da_dw.row(2);
      const Eigen::Matrix<double, 1, 3> da3_dw = da_dw.row(2);
      const Eigen::Matrix<double, 2, 3> dn_dt =
          -(a_mat.topRows<2>() - p_prime * a_mat.row(2));

      const Eigen::Matrix<double, 1, 3> dd_dw =
          ((s.n - 2.0 * s.d * s.m).transpose() * dm_dw) / s.mm;
      const Eigen::Matrix<double, 1, 3> dd_dt = (s.m.transpose() * dn_dt) / s.mm;

      const Eigen::Matrix<double, 1, 3> dw_dw = a.z() * dd_dw + s.d * da3_dw;
      const Eigen::Matrix<double, 1, 3> dw_dt = a.z() * dd_dt + db3_dt;

      const Eigen::Matrix<double, 2, 3> drho_dw =
          (s.m * dd_dw + s.d * dm_dw) / s.w - (s.rho / s.w) * dw_dw;
      const Eigen::Matrix<double, 2, 3> drho_dt =
          (s.m * dd_dt - dn_dt) / s.w - (s.rho / s.w) * dw_dt;

      const double scale = -conf / (sigma * s.eps);
      grad->head<3>() += scale * (drho_dw.transpose() * s.rho);
      grad->tail<3>() += scale * (drho_dt.transpose() * s.rho);
    }
  }
  return total;
}

/// Gradient of the summed-confidence objective with respect to the 6-vector
/// pose chart. Requires the pose within chart validity (|omega| < pi).
inline Vector6d confidence_gradient_wrt_pose(const FlowField& flow, const Intrinsics& k_target,
                                             const RelativePose& pose,
                                             const ConfidenceParams& params = {}) {
  Vector6d g;
  summed_confidence(flow, k_target, pose, k_target, params, &g);
  return g;
}

inline Vector6d confidence_gradient_wrt_pose(const FlowField& flow, const Intrinsics& k_target,
                                             const RelativePose& pose,
                                             const Intrinsics& k_source,
                                             const ConfidenceParams& params) {
  Vector6d g;
  summed_confidence(flow, k_target, pose, k_source, params, &g);
  return g;
}

}  // namespace f2d
