#include "omniloc/sampler.hpp"

#include "omniloc/geometry.hpp"
#include "omniloc/parallel.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace omniloc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPoleRho = 1e-12;     // below this, image-plane partials vanish
constexpr double kNormEps2 = 1e-16;    // smoothing inside the gradient sqrt

inline int clamp_row(long long r, int height) {
  if (r < 0) return 0;
  if (r >= height) return height - 1;
  return static_cast<int>(r);
}

inline int wrap_col(long long c, int width) {
  long long m = c % width;
  if (m < 0) m += width;
  return static_cast<int>(m);
}

// Bilinear fetch at (row, col); optionally the 2x3 jacobian packed as
// jac[2*ch] = d value_ch / d row, jac[2*ch+1] = d value_ch / d col.
inline void sample_one(const Panorama& image, double row, double col, double value[3],
                       double* jac) {
  const double fr_floor = std::floor(row);
  const double fc_floor = std::floor(col);
  const double fr = row - fr_floor;
  const double fc = col - fc_floor;
  const int r0 = clamp_row(static_cast<long long>(fr_floor), image.height);
  const int r1 = clamp_row(static_cast<long long>(fr_floor) + 1, image.height);
  const int c0 = wrap_col(static_cast<long long>(fc_floor), image.width);
  const int c1 = wrap_col(static_cast<long long>(fc_floor) + 1, image.width);

  const double* p00 = &image.data[(static_cast<std::size_t>(r0) * image.width + c0) * 3];
  const double* p01 = &image.data[(static_cast<std::size_t>(r0) * image.width + c1) * 3];
  const double* p10 = &image.data[(static_cast<std::size_t>(r1) * image.width + c0) * 3];
  const double* p11 = &image.data[(static_cast<std::size_t>(r1) * image.width + c1) * 3];

  for (int ch = 0; ch < 3; ++ch) {
    const double top = p00[ch] + fc * (p01[ch] - p00[ch]);
    const double bottom = p10[ch] + fc * (p11[ch] - p10[ch]);
    value[ch] = top + fr * (bottom - top);
    if (jac != nullptr) {
      jac[2 * ch] = bottom - top;
      jac[2 * ch + 1] = (1.0 - fr) * (p01[ch] - p00[ch]) + fr * (p11[ch] - p10[ch]);
    }
  }
}

// Spherical projection of one camera-frame point. Returns false for points
// inside the center guard radius.
inline bool project_one(double x, double y, double z, int height, int width, double& row,
                        double& col, double& rho, double& r2) {
  rho = std::sqrt(x * x + y * y);
  r2 = rho * rho + z * z;
  if (!(r2 >= kCenterEpsilon * kCenterEpsilon)) return false;
  const double phi = std::atan2(z, rho);
  const double theta = std::atan2(y, x);
  row = height * (0.5 - phi / kPi);
  col = width * (theta + kPi) / (2.0 * kPi);
  if (col >= width) col -= width;
  if (col < 0.0) col += width;
  return true;
}

struct BlockPartial {
  double loss_sum = 0.0;
  Eigen::Index n_valid = 0;
  Vec3 s = Vec3::Zero();  // sum of rotated color-gradient pullbacks
  Vec3 q = Vec3::Zero();  // sum of v x h terms for the rotation gradient
};

}  // namespace

SampleResult bilinear_sample(const Panorama& image, const CoordMatrix& coords,
                             bool with_jacobian) {
  image.validate();
  const Eigen::Index n = coords.rows();
  SampleResult out;
  out.values.setZero(n, 3);
  out.valid.assign(static_cast<std::size_t>(n), 1);
  out.has_jacobians = with_jacobian;
  if (with_jacobian) out.jacobians.setZero(n, 6);

  for (Eigen::Index i = 0; i < n; ++i) {
    const double row = coords(i, 0);
    const double col = coords(i, 1);
    if (!std::isfinite(row) || !std::isfinite(col)) {
      out.valid[static_cast<std::size_t>(i)] = 0;
      continue;
    }
    double value[3];
    double jac[6];
    sample_one(image, row, col, value, with_jacobian ? jac : nullptr);
    for (int ch = 0; ch < 3; ++ch) out.values(i, ch) = value[ch];
    if (with_jacobian) {
      for (int k = 0; k < 6; ++k) out.jacobians(i, k) = jac[k];
    }
  }
  return out;
}

double sampling_loss(const PointCloud& cloud, const Panorama& image, const Pose& pose) {
  const Eigen::Index n = cloud.count();
  if (n == 0) return kSentinelLoss;
  const Mat3 r = pose.rotation;
  const Vec3 t = pose.translation;
  const int height = image.height;
  const int width = image.width;

  const std::int64_t n_blocks = (n + kPointBlockSize - 1) / kPointBlockSize;
  std::vector<BlockPartial> partials(static_cast<std::size_t>(n_blocks));

  parallel_blocks(n_blocks, [&](std::int64_t b) {
    const Eigen::Index begin = static_cast<Eigen::Index>(b * kPointBlockSize);
    const Eigen::Index end = std::min<Eigen::Index>(begin + kPointBlockSize, n);
    BlockPartial acc;
    for (Eigen::Index i = begin; i < end; ++i) {
      const Vec3 y = r * (cloud.positions.row(i).transpose() - t);
      double row, col, rho, r2;
      if (!project_one(y[0], y[1], y[2], height, width, row, col, rho, r2)) continue;
      double value[3];
      sample_one(image, row, col, value, nullptr);
      const double d0 = value[0] - cloud.colors(i, 0);
      const double d1 = value[1] - cloud.colors(i, 1);
      const double d2 = value[2] - cloud.colors(i, 2);
      acc.loss_sum += std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
      ++acc.n_valid;
    }
    partials[static_cast<std::size_t>(b)] = acc;
  });

  double loss_sum = 0.0;
  Eigen::Index n_valid = 0;
  for (const BlockPartial& p : partials) {
    loss_sum += p.loss_sum;
    n_valid += p.n_valid;
  }
  if (n_valid == 0) return kSentinelLoss;
  return loss_sum / static_cast<double>(n_valid);
}

LossGradient sampling_loss_grad(const PointCloud& cloud, const Panorama& image,
                                const LocalPoseParam& param) {
  LossGradient out;
  const Eigen::Index n = cloud.count();
  if (n == 0) {
    out.loss = kSentinelLoss;
    return out;
  }

  const Mat3 r_exp = exp_so3(param.omega);
  const Mat3 r0 = param.base_rotation;
  const Mat3 r_exp_t = r_exp.transpose();
  const Vec3 tau = param.tau;
  const int height = image.height;
  const int width = image.width;
  const double row_scale = -height / kPi;            // d row / d phi
  const double col_scale = width / (2.0 * kPi);      // d col / d theta

  const std::int64_t n_blocks = (n + kPointBlockSize - 1) / kPointBlockSize;
  std::vector<BlockPartial> partials(static_cast<std::size_t>(n_blocks));

  parallel_blocks(n_blocks, [&](std::int64_t b) {
    const Eigen::Index begin = static_cast<Eigen::Index>(b * kPointBlockSize);
    const Eigen::Index end = std::min<Eigen::Index>(begin + kPointBlockSize, n);
    BlockPartial acc;
    for (Eigen::Index i = begin; i < end; ++i) {
      const Vec3 v = r0 * (cloud.positions.row(i).transpose() - tau);
      const Vec3 y = r_exp * v;
      double row, col, rho, r2;
      if (!project_one(y[0], y[1], y[2], height, width, row, col, rho, r2)) continue;
      double value[3];
      double jac[6];
      sample_one(image, row, col, value, jac);
      const double d0 = value[0] - cloud.colors(i, 0);
      const double d1 = value[1] - cloud.colors(i, 1);
      const double d2 = value[2] - cloud.colors(i, 2);
      const double s = d0 * d0 + d1 * d1 + d2 * d2;
      acc.loss_sum += std::sqrt(s);
      ++acc.n_valid;

      const double inv_norm = 1.0 / std::sqrt(s + kNormEps2);
      // Pull the color residual back through the bilinear lookup to image
      // coordinates...
      const double g_row = inv_norm * (d0 * jac[0] + d1 * jac[2] + d2 * jac[4]);
      const double g_col = inv_norm * (d0 * jac[1] + d1 * jac[3] + d2 * jac[5]);
      // ...then through the spherical projection to the camera frame. The
      // azimuth/elevation partials degenerate on the pole axis, where the
      // image derivative is taken as zero.
      Vec3 g_y = Vec3::Zero();
      if (rho >= kPoleRho) {
        const double inv_r2 = 1.0 / r2;
        const double inv_rho = 1.0 / rho;
        const double dphi_scale = -y[2] * inv_r2 * inv_rho;
        const Vec3 dphi(y[0] * dphi_scale, y[1] * dphi_scale, rho * inv_r2);
        const double inv_rho2 = inv_rho * inv_rho;
        const Vec3 dtheta(-y[1] * inv_rho2, y[0] * inv_rho2, 0.0);
        g_y = g_row * row_scale * dphi + g_col * col_scale * dtheta;
      }
      const Vec3 h = r_exp_t * g_y;
      acc.s += h;
      acc.q += v.cross(h);
    }
    partials[static_cast<std::size_t>(b)] = acc;
  });

  double loss_sum = 0.0;
  Eigen::Index n_valid = 0;
  Vec3 s_total = Vec3::Zero();
  Vec3 q_total = Vec3::Zero();
  for (const BlockPartial& p : partials) {
    loss_sum += p.loss_sum;
    n_valid += p.n_valid;
    s_total += p.s;
    q_total += p.q;
  }

  if (n_valid == 0) {
    out.loss = kSentinelLoss;
    return out;
  }
  const double inv_n = 1.0 / static_cast<double>(n_valid);
  out.loss = loss_sum * inv_n;
  out.d_tau = -(r0.transpose() * s_total) * inv_n;
  out.d_omega = (so3_right_jacobian(param.omega).transpose() * q_total) * inv_n;
  out.n_valid = n_valid;
  return out;
}

}  // namespace omniloc
