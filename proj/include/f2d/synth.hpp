#pragma once

#include <random>

#include "f2d/camera.hpp"
#include "f2d/flow.hpp"
#include "f2d/image.hpp"
#include "f2d/se3.hpp"
#include "f2d/triangulate.hpp"

namespace f2d {
namespace synth {

enum class SceneKind { kFrontoPlane, kTiltedPlane, kPointCloud };

/// Parametric scene used to generate exact flow / depth / pose triples for
/// closed-loop verification. Depths are defined in the target camera frame:
/// planes satisfy normal . X = dist, point clouds draw one depth per pixel.
struct SyntheticScene {
  SceneKind kind = SceneKind::kFrontoPlane;
  int width = 64;
  int height = 48;
  Intrinsics intrinsics{100.0, 100.0, 31.5, 23.5};
  Intrinsics source_intrinsics{100.0, 100.0, 31.5, 23.5};
  RelativePose true_pose{Eigen::Matrix3d::Identity(), Eigen::Vector3d(-1, 0, 0)};

  double plane_depth = 5.0;                          // fronto / tilted: normal . X = dist
  Eigen::Vector3d plane_normal{0, 0, 1};             // tilted plane orientation
  double cloud_depth_min = 4.0, cloud_depth_max = 20.0;

  double flow_noise_std = 0.0;  // pixels, added to the exact flow
};

struct RenderResult {
  FlowField flow;
  Image<double> gt_depth;
  RelativePose true_pose;
};

/// True depth of the scene surface along the pixel ray q = K^-1 p.
inline double scene_depth_at(const SyntheticScene& scene, const Eigen::Vector3d& q,
                             std::mt19937_64& rng) {
  switch (scene.kind) {
    case SceneKind::kFrontoPlane:
      return scene.plane_depth;
    case SceneKind::kTiltedPlane: {
      const double denom = scene.plane_normal.normalized().dot(q);
      if (denom <= 1e-9) return -1.0;  // ray parallel to or away from the plane
      return scene.plane_depth / denom;
    }
    case SceneKind::kPointCloud: {
      std::uniform_real_distribution<double> dist(scene.cloud_depth_min, scene.cloud_depth_max);
      return dist(rng);
    }
  }
  return -1.0;
}

/// Renders the exact flow field implied by the scene geometry and true pose,
/// plus the ground-truth depth map. Pixels whose exact projection falls
/// outside the source image or behind the source camera are marked invalid.
/// Deterministic per seed, independent of any parallel partitioning.
inline RenderResult render(const SyntheticScene& scene, uint64_t seed) {
  scene.intrinsics.validate();
  scene.source_intrinsics.validate();
  if (scene.width <= 0 || scene.height <= 0)
    throw EmptyScene("render: image dimensions must be positive");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  RenderResult out;
  out.flow = FlowField(scene.width, scene.height);
  out.flow.valid.fill(0);
  out.gt_depth = Image<double>(scene.width, scene.height, 0.0);
  out.true_pose = scene.true_pose;

  std::size_t n_valid = 0;
  for (int y = 0; y < scene.height; ++y) {
    for (int x = 0; x < scene.width; ++x) {
      const Eigen::Vector3d q = scene.intrinsics.unproject(x, y);
      const double d = scene_depth_at(scene, q, rng);
      if (!(d > 0)) continue;
      out.gt_depth(x, y) = d;

      const Eigen::Vector3d in_source = scene.true_pose.apply(d * q);
      if (!(in_source.z() > 0)) continue;  // behind the source camera
      const Eigen::Vector2d p_prime = scene.source_intrinsics.project(in_source);
      if (p_prime.x() < 0 || p_prime.x() > scene.width - 1 || p_prime.y() < 0 ||
          p_prime.y() > scene.height - 1)
        continue;

      double du = p_prime.x() - x;
      double dv = p_prime.y() - y;
      if (scene.flow_noise_std > 0) {
        du += scene.flow_noise_std * noise(rng);
        dv += scene.flow_noise_std * noise(rng);
      }
      out.flow.du(x, y) = du;
      out.flow.dv(x, y) = dv;
      out.flow.valid(x, y) = 1;
      ++n_valid;
    }
  }
  if (n_valid == 0) throw EmptyScene("render: no pixel projects into the source image");
  return out;
}

/// Applies a rotation of exactly rot_deg about a random axis and a translation
/// offset of exactly trans_frac * |t| in a random direction. Deterministic per
/// seed.
inline RelativePose perturb_pose(const RelativePose& pose, double rot_deg, double trans_frac,
                                 uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_unit = [&]() {
    Eigen::Vector3d v;
    do {
      v = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    } while (v.norm() < 1e-12);
    return Eigen::Vector3d(v.normalized());
  };

  RelativePose out = pose;
  if (rot_deg != 0.0) {
    const Eigen::Vector3d axis = random_unit();
    out.rotation = so3_exp(axis * (rot_deg * M_PI / 180.0)) * pose.rotation;
  }
  if (trans_frac != 0.0) {
    out.translation = pose.translation + trans_frac * pose.translation.norm() * random_unit();
  }
  return out;
}

}  // namespace synth
}  // namespace f2d
