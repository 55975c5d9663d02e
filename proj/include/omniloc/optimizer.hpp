#pragma once

#include "omniloc/types.hpp"

#include <limits>
#include <vector>

namespace omniloc {

/// Adam accumulator over the stacked parameter vector [omega; tau].
struct AdamState {
  Vec6 m = Vec6::Zero();
  Vec6 v = Vec6::Zero();
  int step_count = 0;
  double alpha = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update. Returns the step to subtract from the
/// parameters and advances the accumulator state.
Vec6 adam_step(AdamState& state, const Vec6& grad);

/// Reduce-on-plateau schedule: after `patience` consecutive updates without a
/// strict improvement over the best loss seen, the Adam step size is scaled
/// by `decay_factor` and the stall counter restarts.
struct SchedulerState {
  double best_loss = std::numeric_limits<double>::infinity();
  int stall_count = 0;
  double decay_factor = 0.8;
  int patience = 5;
};

void scheduler_update(SchedulerState& sched, AdamState& adam, double new_loss);

struct RefinementTrace {
  std::vector<double> loss_history;  // n_iter + 1 entries, index 0 = start
  LocalPoseParam final_param;        // best-loss iterate, not the last one
  double final_loss = 0.0;

  Pose final_pose() const { return final_param.realized(); }
};

/// Gradient-descent refinement of a starting pose. Each iteration applies one
/// Adam step using the gradient from the previous evaluation, re-evaluates
/// loss and gradient at the new parameters, and feeds the new loss to the
/// plateau scheduler. The reported result is the best iterate seen (the loss
/// floor is noisy, so the last step can sit above it). With gravity_known the
/// rotation update is restricted to yaw. If an evaluation finds no valid
/// points the parameters freeze and the remaining history entries repeat the
/// sentinel loss.
RefinementTrace refine(const PointCloud& cloud, const Panorama& image, const Pose& start,
                       int n_iter, double alpha0, bool gravity_known,
                       double decay_factor = 0.8, int patience = 5);

}  // namespace omniloc
