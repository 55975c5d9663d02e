#include "omniloc/geometry.hpp"

#include "omniloc/random.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace omniloc {

namespace {
constexpr double kPi = std::numbers::pi;
}

Pose LocalPoseParam::realized() const {
  return Pose(exp_so3(omega) * base_rotation, tau);
}

Mat3 rot_z(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 r;
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return r;
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0;
  return m;
}

Mat3 exp_so3(const Vec3& omega) {
  const double theta2 = omega.squaredNorm();
  const Mat3 w = skew(omega);
  double a;  // sin(theta)/theta
  double b;  // (1 - cos(theta))/theta^2
  if (theta2 < 1e-16) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    const double theta = std::sqrt(theta2);
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Mat3::Identity() + a * w + b * (w * w);
}

Mat3 so3_right_jacobian(const Vec3& omega) {
  const double theta2 = omega.squaredNorm();
  const Mat3 w = skew(omega);
  double c1;  // (1 - cos(theta))/theta^2
  double c2;  // (theta - sin(theta))/theta^3
  if (theta2 < 1e-16) {
    c1 = 0.5 - theta2 / 24.0;
    c2 = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    const double theta = std::sqrt(theta2);
    c1 = (1.0 - std::cos(theta)) / theta2;
    c2 = (theta - std::sin(theta)) / (theta2 * theta);
  }
  return Mat3::Identity() - c1 * w + c2 * (w * w);
}

PointMatrix transform_points(const PointMatrix& points, const Pose& pose) {
  PointMatrix out(points.rows(), 3);
  out = (points.rowwise() - pose.translation.transpose()) * pose.rotation.transpose();
  return out;
}

ProjectedPoints project_equirect(const PointMatrix& camera_points, int height, int width) {
  if (height <= 0 || width <= 0) {
    throw std::invalid_argument("projection target must have positive dimensions");
  }
  const Eigen::Index n = camera_points.rows();
  ProjectedPoints out;
  out.coords.resize(n, 2);
  out.valid.assign(static_cast<std::size_t>(n), 1);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = camera_points(i, 0);
    const double y = camera_points(i, 1);
    const double z = camera_points(i, 2);
    const double rho = std::sqrt(x * x + y * y);
    const double r = std::sqrt(rho * rho + z * z);
    if (!(r >= kCenterEpsilon)) {  // also catches NaN inputs
      out.coords(i, 0) = nan;
      out.coords(i, 1) = nan;
      out.valid[static_cast<std::size_t>(i)] = 0;
      continue;
    }
    const double phi = std::atan2(z, rho);
    const double theta = std::atan2(y, x);
    double row = height * (0.5 - phi / kPi);
    double col = width * (theta + kPi) / (2.0 * kPi);
    if (col >= width) col -= width;
    if (col < 0.0) col += width;
    out.coords(i, 0) = row;
    out.coords(i, 1) = col;
  }
  return out;
}

std::vector<Mat3> sample_rotations(int n, bool gravity_known, std::uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("rotation count must be positive");
  std::vector<Mat3> out;
  out.reserve(static_cast<std::size_t>(n));
  if (gravity_known) {
    for (int k = 0; k < n; ++k) {
      out.push_back(rot_z(2.0 * kPi * k / n));
    }
    return out;
  }
  Rng rng(seed);
  for (int k = 0; k < n; ++k) {
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    const double u3 = rng.uniform();
    const double s1 = std::sqrt(1.0 - u1);
    const double s2 = std::sqrt(u1);
    const Eigen::Quaterniond q(s2 * std::cos(2.0 * kPi * u3),   // w
                               s1 * std::sin(2.0 * kPi * u2),   // x
                               s1 * std::cos(2.0 * kPi * u2),   // y
                               s2 * std::sin(2.0 * kPi * u3));  // z
    out.push_back(q.toRotationMatrix());
  }
  return out;
}

namespace {

constexpr double kDegenerateExtent = 1e-6;

double cell_anisotropy(const Vec3& extent, const std::array<int, 3>& counts) {
  double h_min = std::numeric_limits<double>::infinity();
  double h_max = 0.0;
  for (int a = 0; a < 3; ++a) {
    if (extent[a] < kDegenerateExtent) continue;
    const double h = extent[a] / counts[a];
    h_min = std::min(h_min, h);
    h_max = std::max(h_max, h);
  }
  if (!(h_max > 0.0)) return 1.0;
  return h_max / h_min;
}

}  // namespace

TranslationGrid sample_translations(const Vec3& bbox_min, const Vec3& bbox_max, int n) {
  if (n <= 0) throw std::invalid_argument("translation count must be positive");
  const Vec3 extent = bbox_max - bbox_min;
  if ((extent.array() < 0.0).any()) {
    throw std::invalid_argument("translation box has negative extent");
  }

  std::array<bool, 3> degenerate{};
  for (int a = 0; a < 3; ++a) degenerate[a] = extent[a] < kDegenerateExtent;

  // Axes ordered longest-first; used to prefer longer axes among ties.
  std::array<int, 3> axis_order{0, 1, 2};
  std::stable_sort(axis_order.begin(), axis_order.end(),
                   [&](int a, int b) { return extent[a] > extent[b]; });

  std::array<int, 3> best{0, 0, 0};
  long best_product = 0;
  double best_aniso = std::numeric_limits<double>::infinity();

  const int max_x = degenerate[0] ? 1 : n;
  for (int nx = 1; nx <= max_x; ++nx) {
    const int max_y = degenerate[1] ? 1 : n / nx;
    for (int ny = 1; ny <= max_y && nx * ny <= n; ++ny) {
      const int max_z = degenerate[2] ? 1 : n / (nx * ny);
      for (int nz = 1; nz <= max_z && static_cast<long>(nx) * ny * nz <= n; ++nz) {
        const std::array<int, 3> counts{nx, ny, nz};
        const long product = static_cast<long>(nx) * ny * nz;
        if (product < best_product) continue;
        const double aniso = cell_anisotropy(extent, counts);
        bool better = false;
        if (product > best_product) {
          better = true;
        } else if (aniso < best_aniso - 1e-12) {
          better = true;
        } else if (aniso <= best_aniso + 1e-12) {
          // Equal anisotropy: give longer axes more cells, then fall back to
          // lexicographic order for full determinism.
          for (int idx : axis_order) {
            if (counts[idx] != best[idx]) {
              better = counts[idx] > best[idx];
              break;
            }
          }
        }
        if (better) {
          best = counts;
          best_product = product;
          best_aniso = aniso;
        }
      }
    }
  }

  TranslationGrid grid;
  grid.axis_counts = best;
  grid.points.reserve(static_cast<std::size_t>(best_product));
  const Vec3 h(extent[0] / best[0], extent[1] / best[1], extent[2] / best[2]);
  for (int ix = 0; ix < best[0]; ++ix) {
    for (int iy = 0; iy < best[1]; ++iy) {
      for (int iz = 0; iz < best[2]; ++iz) {
        grid.points.emplace_back(bbox_min[0] + h[0] * (ix + 0.5),
                                 bbox_min[1] + h[1] * (iy + 0.5),
                                 bbox_min[2] + h[2] * (iz + 0.5));
      }
    }
  }
  return grid;
}

}  // namespace omniloc
