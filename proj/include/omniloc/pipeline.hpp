#pragma once

#include "omniloc/initializer.hpp"
#include "omniloc/optimizer.hpp"
#include "omniloc/types.hpp"

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace omniloc {

struct LocalizeConfig {
  int n_t = 50;
  int n_r = 32;
  int n_iter = 100;
  int k1 = 50;
  int k2 = 6;
  double alpha0 = 0.1;
  bool gravity_known = false;
  std::uint64_t seed = 0;
  double decay_factor = 0.8;
  int patience = 5;
  // Disabling this keeps the k2 lowest-loss candidates instead of running the
  // second (histogram) ranking stage; exists for ablation.
  bool use_histogram_filter = true;

  static LocalizeConfig defaults(bool gravity_known);

  /// Throws std::invalid_argument unless counts are positive, k2 <= k1,
  /// k1 <= n_t*n_r, and the scalars are in range.
  void validate() const;
};

struct LocalizationResult {
  Pose best_pose;
  double best_loss = kSentinelLoss;
  std::vector<Pose> start_poses;         // the refined candidates, in rank order
  std::vector<RefinementTrace> traces;   // parallel to start_poses
  double init_seconds = 0.0;
  double refine_seconds = 0.0;
  int candidate_count = 0;               // total candidates generated
  bool failed = false;                   // no candidate ever saw a valid point
};

/// Full localization: generate the candidate grid, keep the k1 best by
/// sampling loss, re-rank those by color-histogram intersection down to k2,
/// refine each survivor, and return the refinement with the lowest final
/// loss (ties to the earlier trace). Deterministic for a fixed config and
/// seed, independent of the worker-thread count.
LocalizationResult localize(const PointCloud& cloud, const Panorama& image,
                            const LocalizeConfig& config);

struct PoseError {
  double t_error = 0.0;      // meters
  double r_error_deg = 0.0;  // degrees, in [0, 180]
};

PoseError pose_error(const Pose& estimate, const Pose& truth);

/// Success thresholds for batch accuracy: both must hold strictly.
inline constexpr double kAccuracyTransThreshold = 0.1;  // meters
inline constexpr double kAccuracyRotThresholdDeg = 5.0;

struct BatchSummary {
  std::array<double, 3> t_quartiles{};  // Q1, median, Q3 (meters)
  std::array<double, 3> r_quartiles{};  // Q1, median, Q3 (degrees)
  double accuracy = 0.0;
  int count = 0;
};

/// Error quartiles (linear interpolation between order statistics) and the
/// fraction of (estimate, truth) pairs under both accuracy thresholds.
BatchSummary evaluate_batch(const std::vector<std::pair<Pose, Pose>>& pairs);

/// Loss landscape slice: for every (x, y) cell center of a grid_res x
/// grid_res grid over the cloud's bounding-box footprint at height z, the
/// minimum sampling loss over the rotation sample set (defaults: 8 yaw
/// rotations when gravity is known, else 32 seeded random rotations).
/// Row index walks x, column index walks y.
Eigen::MatrixXd dump_loss_surface(const PointCloud& cloud, const Panorama& image, double z,
                                  int grid_res, bool gravity_known, int n_r = 0,
                                  std::uint64_t seed = 0);

}  // namespace omniloc
