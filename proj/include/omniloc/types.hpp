#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <vector>

namespace omniloc {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

// N x 3 row-major blocks are the native layout for per-point data.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using CoordMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

// Loss value reported when no point projects validly.
inline constexpr double kSentinelLoss = std::numeric_limits<double>::infinity();

/// Colored point cloud. Row i of `positions` is a point in meters, row i of
/// `colors` its RGB value with every channel in [0,1].
struct PointCloud {
  PointMatrix positions;
  PointMatrix colors;

  PointCloud() = default;
  PointCloud(PointMatrix positions_in, PointMatrix colors_in);

  Eigen::Index count() const { return positions.rows(); }
  Vec3 bbox_min() const;
  Vec3 bbox_max() const;

  /// Throws std::invalid_argument on shape mismatch, non-finite coordinates
  /// or out-of-range colors.
  void validate() const;
};

/// Equirectangular RGB panorama. Channel-interleaved row-major storage,
/// values in [0,1]. The column axis is periodic (azimuth); the row axis is
/// not (north pole at row 0).
struct Panorama {
  int height = 0;
  int width = 0;
  std::vector<double> data;  // height * width * 3

  Panorama() = default;
  Panorama(int height_in, int width_in, double fill = 0.0);

  double& at(int r, int c, int ch) {
    return data[(static_cast<std::size_t>(r) * width + c) * 3 + ch];
  }
  double at(int r, int c, int ch) const {
    return data[(static_cast<std::size_t>(r) * width + c) * 3 + ch];
  }
  Vec3 pixel(int r, int c) const {
    const double* p = &data[(static_cast<std::size_t>(r) * width + c) * 3];
    return Vec3(p[0], p[1], p[2]);
  }
  void set_pixel(int r, int c, const Vec3& rgb) {
    double* p = &data[(static_cast<std::size_t>(r) * width + c) * 3];
    p[0] = rgb[0];
    p[1] = rgb[1];
    p[2] = rgb[2];
  }

  void validate() const;
};

/// Rigid camera pose. A world point X maps into the camera frame as
/// R * (X - t), so `translation` is the camera position in world coordinates.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Pose() = default;
  Pose(const Mat3& rotation_in, const Vec3& translation_in);

  static Pose identity() { return Pose(); }

  /// Throws std::invalid_argument unless `rotation` is orthonormal with
  /// determinant +1 within 1e-6.
  void validate() const;
};

/// Local 6-DoF parametrization used during refinement: the realized pose is
/// (exp(skew(omega)) * base_rotation, tau). `omega` starts at zero for every
/// refinement run so the exponential stays in its well-conditioned region.
struct LocalPoseParam {
  Vec3 omega = Vec3::Zero();
  Vec3 tau = Vec3::Zero();
  Mat3 base_rotation = Mat3::Identity();

  Pose realized() const;
};

}  // namespace omniloc
