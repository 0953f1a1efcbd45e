#pragma once

#include <Eigen/Core>
#include <cmath>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "f2d/camera.hpp"
#include "f2d/image.hpp"
#include "f2d/triangulate.hpp"

namespace f2d {

struct FrameInfo {
  int index = 0;
  Eigen::Vector3d camera_center = Eigen::Vector3d::Zero();
  Intrinsics intrinsics;
  std::string image_ref;
};

using FrameSequence = std::vector<FrameInfo>;

inline void validate_frame_sequence(const FrameSequence& seq) {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (!seq[i].camera_center.allFinite())
      throw Error("frame sequence: non-finite camera center at position " + std::to_string(i));
    if (i > 0 && seq[i].index <= seq[i - 1].index)
      throw Error("frame sequence: indices must be strictly increasing");
  }
}

struct FusionConfig {
  double translation_threshold = 0.80;  // meters; 0.80 driving, 0.12 indoor
  double min_confidence = 0.05;
  double external_default_confidence = 0.5;
  double depth_cap = 80.0;  // meters; 80 driving, 10 indoor

  void validate() const {
    if (!(translation_threshold > 0))
      throw ConfigError("fusion config: translation threshold must be positive");
    if (!(min_confidence >= 0 && min_confidence < 1))
      throw ConfigError("fusion config: min_confidence must be in [0, 1)");
    if (!(depth_cap > 0)) throw ConfigError("fusion config: depth_cap must be positive");
  }
};

/// Offsets (in sequence positions) of the nearest source frames whose camera
/// center lies more than the threshold away from the target's. Either side is
/// absent when the search exhausts the sequence in that direction.
struct SourceSelection {
  std::optional<int> backward;  // k1: target - k1
  std::optional<int> forward;   // k2: target + k2

  bool any() const { return backward.has_value() || forward.has_value(); }
};

inline SourceSelection select_source_frames(const FrameSequence& seq, int target_pos,
                                            double threshold) {
  if (target_pos < 0 || target_pos >= static_cast<int>(seq.size()))
    throw Error("select_source_frames: target position out of range");
  const Eigen::Vector3d origin = seq[target_pos].camera_center;

  SourceSelection sel;
  for (int k = 1; target_pos - k >= 0; ++k) {
    if ((seq[target_pos - k].camera_center - origin).norm() > threshold) {
      sel.backward = k;
      break;
    }
  }
  for (int k = 1; target_pos + k < static_cast<int>(seq.size()); ++k) {
    if ((seq[target_pos + k].camera_center - origin).norm() > threshold) {
      sel.forward = k;
      break;
    }
  }
  return sel;
}

/// Adapts an externally produced depth map to a DepthProposal. Pixels without
/// a positive depth are masked out; a constant confidence is substituted when
/// the method provides none.
inline DepthProposal external_proposal(const Image<double>& depth,
                                       const Image<double>* confidence,
                                       double default_confidence) {
  if (confidence) require_same_size(depth, *confidence, "external_proposal");
  if (!(default_confidence >= 0 && default_confidence <= 1))
    throw ConfigError("external proposal: default confidence must be in [0, 1]");

  DepthProposal out(depth.width(), depth.height());
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      const double d = depth(x, y);
      if (!(d > 0) || !std::isfinite(d)) continue;
      double c = confidence ? (*confidence)(x, y) : default_confidence;
      if (!(c >= 0 && c <= 1))
        throw Error("external proposal: confidence outside [0, 1]");
      out.depth(x, y) = d;
      out.confidence(x, y) = c;
      out.positive_mask(x, y) = 1;
    }
  }
  return out;
}

/// Confidence-weighted fusion in the disparity domain:
///   1/D = sum_i w_i / d_i / sum_i w_i  with  w_i = C_i >= min_confidence.
/// Pixels where no proposal clears the floor are filled from the nearest
/// fused pixel (multi-source BFS, 4-connected, row-major tie order) and then
/// capped at depth_cap. The output is strictly positive everywhere.
inline Image<double> fuse_proposals(const std::vector<DepthProposal>& proposals,
                                    const FusionConfig& cfg = {}) {
  cfg.validate();
  if (proposals.empty()) throw EmptyInput("fuse_proposals: no proposals given");
  const int w = proposals.front().width(), h = proposals.front().height();
  for (const auto& p : proposals) {
    require_same_size(p.depth, proposals.front().depth, "fuse_proposals");
    require_same_size(p.depth, p.confidence, "fuse_proposals");
    require_same_size(p.depth, p.positive_mask, "fuse_proposals");
  }

  Image<double> fused(w, h, 0.0);
  Image<uint8_t> has_value(w, h, 0);
  std::size_t n_valid = 0;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double weight_sum = 0, disparity_sum = 0;
      for (const auto& p : proposals) {
        if (!p.positive_mask(x, y)) continue;
        const double c = p.confidence(x, y);
        if (c < cfg.min_confidence || c <= 0) continue;
        weight_sum += c;
        disparity_sum += c / p.depth(x, y);
      }
      if (weight_sum > 0) {
        fused(x, y) = weight_sum / disparity_sum;
        has_value(x, y) = 1;
        ++n_valid;
      }
    }
  }
  if (n_valid == 0) throw AllInvalid("fuse_proposals: no pixel clears the confidence floor");

  if (n_valid < static_cast<std::size_t>(w) * h) {
    std::deque<std::pair<int, int>> queue;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (has_value(x, y)) queue.emplace_back(x, y);
    const int dx[4] = {1, -1, 0, 0};
    const int dy[4] = {0, 0, 1, -1};
    while (!queue.empty()) {
      const auto [x, y] = queue.front();
      queue.pop_front();
      for (int i = 0; i < 4; ++i) {
        const int nx = x + dx[i], ny = y + dy[i];
        if (nx < 0 || nx >= w || ny < 0 || ny >= h || has_value(nx, ny)) continue;
        fused(nx, ny) = std::min(fused(x, y), cfg.depth_cap);
        has_value(nx, ny) = 1;
        queue.emplace_back(nx, ny);
      }
    }
  }
  return fused;
}

/// Log-domain depth loss over ground-truth-supported pixels:
/// sum |log D - log Dhat|. Ground truth is sparse; values <= 0 carry no truth.
inline double loss_depth(const Image<double>& pred, const Image<double>& gt) {
  require_same_size(pred, gt, "loss_depth");
  double total = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!(gt[i] > 0)) continue;
    if (!(pred[i] > 0)) throw Error("loss_depth: prediction must be positive on the gt support");
    total += std::abs(std::log(pred[i]) - std::log(gt[i]));
    ++n;
  }
  if (n == 0) throw NoGroundTruth("loss_depth: ground truth support is empty");
  return total;
}

/// Laplacian smoothness penalty on the disparity map: sum over interior
/// pixels of |5-point Laplacian of 1/D|.
inline double loss_smooth(const Image<double>& pred) {
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (!(pred[i] > 0)) throw Error("loss_smooth: depth map must be positive everywhere");
  double total = 0;
  for (int y = 1; y + 1 < pred.height(); ++y) {
    for (int x = 1; x + 1 < pred.width(); ++x) {
      const double lap = 1.0 / pred(x - 1, y) + 1.0 / pred(x + 1, y) + 1.0 / pred(x, y - 1) +
                         1.0 / pred(x, y + 1) - 4.0 / pred(x, y);
      total += std::abs(lap);
    }
  }
  return total;
}

/// lambda_d * L_depth + lambda_s * L_smooth.
inline double fusion_loss(const Image<double>& pred, const Image<double>& gt,
                          double lambda_d = 1.0, double lambda_s = 0.5) {
  return lambda_d * loss_depth(pred, gt) + lambda_s * loss_smooth(pred);
}

}  // namespace f2d
