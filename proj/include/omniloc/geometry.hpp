#pragma once

#include "omniloc/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace omniloc {

/// Points closer to the camera center than this are dropped from projection.
inline constexpr double kCenterEpsilon = 1e-8;

Mat3 rot_z(double angle);
Mat3 skew(const Vec3& v);

/// Rodrigues exponential. Switches to a second-order Taylor expansion below
/// |omega| = 1e-8 so the map stays smooth through zero.
Mat3 exp_so3(const Vec3& omega);

/// Right Jacobian of the exponential:
/// exp((omega + d)^) ~= exp(omega^) * exp((Jr(omega) d)^).
Mat3 so3_right_jacobian(const Vec3& omega);

/// Applies y_i = R (X_i - t) to every row.
PointMatrix transform_points(const PointMatrix& points, const Pose& pose);

struct ProjectedPoints {
  CoordMatrix coords;  // (row, col) per point
  std::vector<std::uint8_t> valid;
};

/// Maps camera-frame points onto an equirectangular image. Azimuth
/// theta = atan2(y, x) spans the columns (theta = -pi at column 0, wrapped
/// into [0, W)); elevation phi = atan2(z, sqrt(x^2+y^2)) spans the rows with
/// the +z pole at row 0. Rows land in [0, H] and are clamped later by the
/// sampler. Points with norm below kCenterEpsilon get NaN coordinates and a
/// cleared valid flag.
ProjectedPoints project_equirect(const PointMatrix& camera_points, int height, int width);

/// Candidate rotations for initialization. With gravity known these are the n
/// yaw rotations 2*pi*k/n about +z; otherwise n rotations drawn uniformly
/// from SO(3) (uniform quaternions, deterministic in `seed`).
std::vector<Mat3> sample_rotations(int n, bool gravity_known, std::uint64_t seed);

struct TranslationGrid {
  std::array<int, 3> axis_counts;
  std::vector<Vec3> points;  // x-major, then y, then z
};

/// Cell-centered grid of at most n candidate translations inside the box.
/// Axis counts maximize the total count, then minimize cell anisotropy, then
/// put more cells on longer axes. Axes thinner than 1e-6 m collapse to a
/// single layer at the midpoint.
TranslationGrid sample_translations(const Vec3& bbox_min, const Vec3& bbox_max, int n);

}  // namespace omniloc
