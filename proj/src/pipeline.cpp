#include "omniloc/pipeline.hpp"

#include "omniloc/geometry.hpp"
#include "omniloc/parallel.hpp"
#include "omniloc/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace omniloc {

LocalizeConfig LocalizeConfig::defaults(bool gravity_known) {
  LocalizeConfig c;
  c.gravity_known = gravity_known;
  if (gravity_known) c.n_r = 8;
  return c;
}

void LocalizeConfig::validate() const {
  if (n_t < 1 || n_r < 1 || n_iter < 0 || k1 < 1 || k2 < 1) {
    throw std::invalid_argument("localization counts must be positive");
  }
  if (k2 > k1) throw std::invalid_argument("k2 must not exceed k1");
  if (static_cast<long>(k1) > static_cast<long>(n_t) * n_r) {
    throw std::invalid_argument("k1 must not exceed the candidate count n_t * n_r");
  }
  if (!(alpha0 > 0.0)) throw std::invalid_argument("alpha0 must be positive");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) {
    throw std::invalid_argument("decay_factor must lie in (0, 1]");
  }
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
}

namespace {
double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}
}  // namespace

LocalizationResult localize(const PointCloud& cloud, const Panorama& image,
                            const LocalizeConfig& config) {
  config.validate();
  cloud.validate();
  image.validate();
  if (cloud.count() == 0) throw std::invalid_argument("cannot localize against an empty cloud");

  LocalizationResult result;
  const auto t_init = std::chrono::steady_clock::now();

  const CandidateSet candidates =
      generate_candidates(cloud, config.n_t, config.n_r, config.gravity_known, config.seed);
  result.candidate_count = static_cast<int>(candidates.poses.size());

  const CandidateSet stage1 = filter_by_loss(cloud, image, candidates, config.k1);
  CandidateSet stage2;
  if (config.use_histogram_filter) {
    stage2 = filter_by_histogram(cloud, image, stage1, config.k2);
  } else {
    const std::size_t keep =
        std::min<std::size_t>(static_cast<std::size_t>(config.k2), stage1.poses.size());
    stage2.poses.assign(stage1.poses.begin(), stage1.poses.begin() + keep);
    stage2.losses.assign(stage1.losses.begin(), stage1.losses.begin() + keep);
  }
  result.init_seconds = seconds_since(t_init);

  const auto t_refine = std::chrono::steady_clock::now();
  result.start_poses = stage2.poses;
  result.traces.resize(result.start_poses.size());
  parallel_blocks(static_cast<std::int64_t>(result.start_poses.size()), [&](std::int64_t i) {
    result.traces[static_cast<std::size_t>(i)] =
        refine(cloud, image, result.start_poses[static_cast<std::size_t>(i)], config.n_iter,
               config.alpha0, config.gravity_known, config.decay_factor, config.patience);
  });
  result.refine_seconds = seconds_since(t_refine);

  std::size_t best = 0;
  double best_loss = kSentinelLoss;
  bool any_finite = false;
  for (std::size_t i = 0; i < result.traces.size(); ++i) {
    const double l = result.traces[i].final_loss;
    if (std::isfinite(l) && (!any_finite || l < best_loss)) {
      any_finite = true;
      best_loss = l;
      best = i;
    }
  }
  if (result.traces.empty()) {
    result.failed = true;
    return result;
  }
  if (!any_finite) {
    // Nothing ever projected onto the image; report the top-ranked start as a
    // best effort and flag the failure instead of throwing, so batch drivers
    // can keep going.
    result.failed = true;
    result.best_pose = result.start_poses.front();
    result.best_loss = kSentinelLoss;
    return result;
  }
  result.best_pose = result.traces[best].final_pose();
  result.best_loss = best_loss;
  return result;
}

PoseError pose_error(const Pose& estimate, const Pose& truth) {
  estimate.validate();
  truth.validate();
  PoseError e;
  e.t_error = (estimate.translation - truth.translation).norm();
  const double tr = (estimate.rotation.transpose() * truth.rotation).trace();
  const double c = std::clamp((tr - 1.0) / 2.0, -1.0, 1.0);
  e.r_error_deg = std::acos(c) * 180.0 / std::numbers::pi;
  return e;
}

namespace {

std::array<double, 3> quartiles(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  const auto at = [&](double q) {
    const double h = q * static_cast<double>(m - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, m - 1);
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
  };
  return {at(0.25), at(0.5), at(0.75)};
}

}  // namespace

BatchSummary evaluate_batch(const std::vector<std::pair<Pose, Pose>>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("cannot summarize an empty batch");
  std::vector<double> t_errors;
  std::vector<double> r_errors;
  t_errors.reserve(pairs.size());
  r_errors.reserve(pairs.size());
  int hits = 0;
  for (const auto& [estimate, truth] : pairs) {
    const PoseError e = pose_error(estimate, truth);
    t_errors.push_back(e.t_error);
    r_errors.push_back(e.r_error_deg);
    if (e.t_error < kAccuracyTransThreshold && e.r_error_deg < kAccuracyRotThresholdDeg) {
      ++hits;
    }
  }
  BatchSummary s;
  s.t_quartiles = quartiles(t_errors);
  s.r_quartiles = quartiles(r_errors);
  s.accuracy = static_cast<double>(hits) / static_cast<double>(pairs.size());
  s.count = static_cast<int>(pairs.size());
  return s;
}

Eigen::MatrixXd dump_loss_surface(const PointCloud& cloud, const Panorama& image, double z,
                                  int grid_res, bool gravity_known, int n_r,
                                  std::uint64_t seed) {
  if (grid_res < 2) throw std::invalid_argument("surface grid must be at least 2x2");
  if (cloud.count() == 0) throw std::invalid_argument("cannot slice an empty cloud");
  if (n_r <= 0) n_r = gravity_known ? 8 : 32;

  const Vec3 lo = cloud.bbox_min();
  const Vec3 hi = cloud.bbox_max();
  const std::vector<Mat3> rotations = sample_rotations(n_r, gravity_known, seed);

  Eigen::MatrixXd surface(grid_res, grid_res);
  const double hx = (hi[0] - lo[0]) / grid_res;
  const double hy = (hi[1] - lo[1]) / grid_res;
  parallel_blocks(static_cast<std::int64_t>(grid_res) * grid_res, [&](std::int64_t cell) {
    const int ix = static_cast<int>(cell / grid_res);
    const int iy = static_cast<int>(cell % grid_res);
    const Vec3 t(lo[0] + hx * (ix + 0.5), lo[1] + hy * (iy + 0.5), z);
    double best = kSentinelLoss;
    for (const Mat3& r : rotations) {
      best = std::min(best, sampling_loss(cloud, image, Pose(r, t)));
    }
    surface(ix, iy) = best;
  });
  return surface;
}

}  // namespace omniloc
