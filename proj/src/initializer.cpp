#include "omniloc/initializer.hpp"

#include "omniloc/geometry.hpp"
#include "omniloc/parallel.hpp"
#include "omniloc/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace omniloc {

CandidateSet generate_candidates(const PointCloud& cloud, int n_t, int n_r,
                                 bool gravity_known, std::uint64_t seed) {
  if (n_t < 1 || n_r < 1) throw std::invalid_argument("candidate counts must be >= 1");
  if (cloud.count() == 0) throw std::invalid_argument("cannot place candidates in an empty cloud");

  const TranslationGrid grid = sample_translations(cloud.bbox_min(), cloud.bbox_max(), n_t);
  const std::vector<Mat3> rotations = sample_rotations(n_r, gravity_known, seed);

  CandidateSet set;
  set.poses.reserve(grid.points.size() * rotations.size());
  for (const Vec3& t : grid.points) {
    for (const Mat3& r : rotations) {
      set.poses.emplace_back(r, t);
    }
  }
  return set;
}

CandidateSet filter_by_loss(const PointCloud& cloud, const Panorama& image,
                            const CandidateSet& candidates, int k1) {
  if (k1 < 1) throw std::invalid_argument("k1 must be >= 1");
  const std::size_t n = candidates.poses.size();

  std::vector<double> losses(n, kSentinelLoss);
  parallel_blocks(static_cast<std::int64_t>(n), [&](std::int64_t i) {
    losses[static_cast<std::size_t>(i)] =
        sampling_loss(cloud, image, candidates.poses[static_cast<std::size_t>(i)]);
  });

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    // Sentinel (infinite) losses compare greater than every finite loss, so
    // they naturally sink to the back; ties keep candidate-index order via
    // the stable sort.
    return losses[a] < losses[b];
  });

  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k1), n);
  CandidateSet out;
  out.poses.reserve(keep);
  out.losses.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    out.poses.push_back(candidates.poses[order[i]]);
    out.losses.push_back(losses[order[i]]);
  }
  return out;
}

namespace {

inline int bin_of(double c) {
  int b = static_cast<int>(c * 8.0);
  if (b > 7) b = 7;
  if (b < 0) b = 0;
  return b;
}

void accumulate(ColorHistogram& h, const PointMatrix& colors,
                const std::vector<std::uint8_t>* mask, double& total) {
  const Eigen::Index n = colors.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mask != nullptr && (*mask)[static_cast<std::size_t>(i)] == 0) continue;
    const int br = bin_of(colors(i, 0));
    const int bg = bin_of(colors(i, 1));
    const int bb = bin_of(colors(i, 2));
    h.bins[static_cast<std::size_t>(br * 64 + bg * 8 + bb)] += 1.0;
    total += 1.0;
  }
}

ColorHistogram build_histogram(const PointMatrix& colors,
                               const std::vector<std::uint8_t>* mask) {
  ColorHistogram h;
  double total = 0.0;
  accumulate(h, colors, mask, total);
  if (total > 0.0) {
    for (double& b : h.bins) b /= total;
  }
  return h;
}

}  // namespace

ColorHistogram histogram(const PointMatrix& colors) { return build_histogram(colors, nullptr); }

ColorHistogram histogram(const PointMatrix& colors, const std::vector<std::uint8_t>& mask) {
  if (static_cast<std::size_t>(colors.rows()) != mask.size()) {
    throw std::invalid_argument("histogram mask length must match color count");
  }
  return build_histogram(colors, &mask);
}

double histogram_intersection(const ColorHistogram& a, const ColorHistogram& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.bins.size(); ++i) s += std::min(a.bins[i], b.bins[i]);
  return s;
}

CandidateSet filter_by_histogram(const PointCloud& cloud, const Panorama& image,
                                 const CandidateSet& set, int k2) {
  if (k2 < 1) throw std::invalid_argument("k2 must be >= 1");
  const std::size_t n = set.poses.size();
  const ColorHistogram cloud_hist = histogram(cloud.colors);

  std::vector<double> scores(n, 0.0);
  parallel_blocks(static_cast<std::int64_t>(n), [&](std::int64_t idx) {
    const std::size_t i = static_cast<std::size_t>(idx);
    const PointMatrix camera_points = transform_points(cloud.positions, set.poses[i]);
    const ProjectedPoints proj = project_equirect(camera_points, image.height, image.width);
    const SampleResult sampled = bilinear_sample(image, proj.coords);
    const ColorHistogram image_hist = histogram(sampled.values, sampled.valid);
    scores[i] = histogram_intersection(image_hist, cloud_hist);
  });

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k2), n);
  CandidateSet out;
  out.poses.reserve(keep);
  out.losses.reserve(keep);
  out.scores.reserve(keep);
  const bool have_losses = set.losses.size() == n;
  for (std::size_t i = 0; i < keep; ++i) {
    out.poses.push_back(set.poses[order[i]]);
    if (have_losses) out.losses.push_back(set.losses[order[i]]);
    out.scores.push_back(scores[order[i]]);
  }
  return out;
}

}  // namespace omniloc
