#include "omniloc/types.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <stdexcept>
#include <string>

namespace omniloc {

PointCloud::PointCloud(PointMatrix positions_in, PointMatrix colors_in)
    : positions(std::move(positions_in)), colors(std::move(colors_in)) {}

Vec3 PointCloud::bbox_min() const {
  if (positions.rows() == 0) throw std::invalid_argument("bbox of empty cloud");
  return positions.colwise().minCoeff().transpose();
}

Vec3 PointCloud::bbox_max() const {
  if (positions.rows() == 0) throw std::invalid_argument("bbox of empty cloud");
  return positions.colwise().maxCoeff().transpose();
}

void PointCloud::validate() const {
  if (positions.rows() != colors.rows()) {
    throw std::invalid_argument(
        "point cloud has " + std::to_string(positions.rows()) + " positions but " +
        std::to_string(colors.rows()) + " colors");
  }
  if (!positions.allFinite()) {
    throw std::invalid_argument("point cloud contains non-finite coordinates");
  }
  if (!colors.allFinite() || colors.minCoeff() < 0.0 || colors.maxCoeff() > 1.0) {
    throw std::invalid_argument("point colors must lie in [0,1]");
  }
}

Panorama::Panorama(int height_in, int width_in, double fill)
    : height(height_in),
      width(width_in),
      data(static_cast<std::size_t>(height_in) * width_in * 3, fill) {}

void Panorama::validate() const {
  if (height <= 0 || width <= 0) {
    throw std::invalid_argument("panorama dimensions must be positive");
  }
  if (data.size() != static_cast<std::size_t>(height) * width * 3) {
    throw std::invalid_argument("panorama buffer size does not match dimensions");
  }
  for (double v : data) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw std::invalid_argument("panorama values must lie in [0,1]");
    }
  }
}

Pose::Pose(const Mat3& rotation_in, const Vec3& translation_in)
    : rotation(rotation_in), translation(translation_in) {}

void Pose::validate() const {
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).norm();
  if (ortho > 1e-6) {
    throw std::invalid_argument("pose rotation is not orthonormal (|R^T R - I| = " +
                                std::to_string(ortho) + ")");
  }
  if (std::abs(rotation.determinant() - 1.0) > 1e-6) {
    throw std::invalid_argument("pose rotation must have determinant +1");
  }
  if (!translation.allFinite()) {
    throw std::invalid_argument("pose translation must be finite");
  }
}

}  // namespace omniloc
