#pragma once

#include <vector>

#include "f2d/lbfgsb.hpp"
#include "f2d/triangulate.hpp"

namespace f2d {

struct RefinementConfig {
  int max_iterations = 100;
  double gradient_tolerance = 1e-6;
  double objective_tolerance = 1e-9;  // relative improvement threshold
  double rotation_lower = -M_PI;      // bounds per axis-angle coordinate
  double rotation_upper = M_PI;
  bool use_finite_difference_gradient = false;  // cross-checking fallback
  double finite_difference_step = 1e-6;

  void validate() const {
    if (max_iterations < 1)
      throw DimensionMismatch("refinement config: max_iterations must be >= 1");
    if (!(rotation_lower < rotation_upper))
      throw DimensionMismatch("refinement config: rotation bounds must satisfy lower < upper");
  }
};

struct RefinementResult {
  RelativePose refined_pose;
  double initial_objective = 0;
  double final_objective = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<optim::IterationRecord> trace;  // (objective, projected-gradient norm)
};

/// Summed confidence over the positive-depth set: the quantity the refinement
/// maximizes. Equals the sum of the confidence map produced by flow_to_depth.
inline double refinement_objective(const FlowField& flow, const Intrinsics& k_target,
                                   const RelativePose& pose, const ConfidenceParams& params = {}) {
  return summed_confidence(flow, k_target, pose, k_target, params);
}

inline double refinement_objective(const FlowField& flow, const Intrinsics& k_target,
                                   const RelativePose& pose, const Intrinsics& k_source,
                                   const ConfidenceParams& params) {
  return summed_confidence(flow, k_target, pose, k_source, params);
}

/// Maximizes the summed confidence over the 6-vector pose chart with a
/// bounded limited-memory quasi-Newton method (descent on the negated
/// objective). Rotation coordinates are box-constrained, translation is free.
/// Never returns a pose with a lower objective than the input.
inline RefinementResult refine_pose(const FlowField& flow, const Intrinsics& k_target,
                                    const RelativePose& initial_pose,
                                    const ConfidenceParams& params = {},
                                    const RefinementConfig& cfg = {},
                                    const Intrinsics* k_source = nullptr) {
  cfg.validate();
  params.validate();
  const Intrinsics ks = k_source ? *k_source : k_target;

  optim::Objective negated = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const RelativePose pose = RelativePose::from_chart(Vector6d(x));
    Vector6d g;
    double value;
    if (cfg.use_finite_difference_gradient) {
      value = summed_confidence(flow, k_target, pose, ks, params);
      const double h = cfg.finite_difference_step;
      for (int i = 0; i < 6; ++i) {
        Vector6d xp = Vector6d(x), xm = Vector6d(x);
        xp[i] += h;
        xm[i] -= h;
        const double fp = summed_confidence(flow, k_target, RelativePose::from_chart(xp), ks, params);
        const double fm = summed_confidence(flow, k_target, RelativePose::from_chart(xm), ks, params);
        g[i] = (fp - fm) / (2 * h);
      }
    } else {
      value = summed_confidence(flow, k_target, pose, ks, params, &g);
    }
    grad = -g;
    return -value;
  };

  Eigen::VectorXd lower(6), upper(6);
  const double inf = std::numeric_limits<double>::infinity();
  lower << cfg.rotation_lower, cfg.rotation_lower, cfg.rotation_lower, -inf, -inf, -inf;
  upper << cfg.rotation_upper, cfg.rotation_upper, cfg.rotation_upper, inf, inf, inf;

  optim::Options opts;
  opts.memory = 10;
  opts.max_iterations = cfg.max_iterations;
  opts.grad_tolerance = cfg.gradient_tolerance;
  opts.f_rel_tolerance = cfg.objective_tolerance;

  const optim::Result r =
      optim::minimize_bounded(negated, initial_pose.to_chart(), lower, upper, opts);

  RefinementResult out;
  out.refined_pose = RelativePose::from_chart(Vector6d(r.x));
  out.final_objective = -r.f;
  out.iterations = r.iterations;
  out.converged = r.converged;
  out.trace.reserve(r.trace.size());
  for (const auto& rec : r.trace) out.trace.push_back({-rec.f, rec.grad_norm});
  out.initial_objective = out.trace.empty() ? out.final_objective : out.trace.front().f;
  return out;
}

}  // namespace f2d
