#pragma once

#include "omniloc/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace omniloc {

/// Ordered pose candidates with whatever ranking data has been attached so
/// far: `losses` after the loss filter, `scores` after the histogram filter.
struct CandidateSet {
  std::vector<Pose> poses;
  std::vector<double> losses;
  std::vector<double> scores;
};

/// Cartesian product of the bounding-box translation grid and the rotation
/// sample set, translation-major: candidate t*n_r + r pairs translation t
/// with rotation r.
CandidateSet generate_candidates(const PointCloud& cloud, int n_t, int n_r,
                                 bool gravity_known, std::uint64_t seed);

/// Keeps the k1 candidates with the smallest sampling loss (all, if fewer),
/// sorted ascending with ties resolved by original candidate index. Sentinel
/// losses sort last.
CandidateSet filter_by_loss(const PointCloud& cloud, const Panorama& image,
                            const CandidateSet& candidates, int k1);

/// Joint RGB histogram on an 8x8x8 grid, L1-normalized (all-zero when built
/// from no samples).
struct ColorHistogram {
  std::array<double, 512> bins{};
};

ColorHistogram histogram(const PointMatrix& colors);
ColorHistogram histogram(const PointMatrix& colors, const std::vector<std::uint8_t>& mask);

/// Sum over bins of min(a, b); 1 for identical distributions, 0 for disjoint.
double histogram_intersection(const ColorHistogram& a, const ColorHistogram& b);

/// Scores each candidate by the intersection between the histogram of image
/// colors sampled at the projected cloud points and the histogram of the
/// cloud's own colors, then keeps the k2 best. Ties preserve the incoming
/// (loss-rank) order; output is sorted by score descending.
CandidateSet filter_by_histogram(const PointCloud& cloud, const Panorama& image,
                                 const CandidateSet& set, int k2);

}  // namespace omniloc
