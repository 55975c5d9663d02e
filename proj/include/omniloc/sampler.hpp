#pragma once

#include "omniloc/types.hpp"

#include <cstdint>
#include <vector>

namespace omniloc {

struct SampleResult {
  PointMatrix values;  // one RGB row per coordinate
  // Per coordinate: d(value_ch)/d(row) at column 2*ch, d(value_ch)/d(col) at
  // 2*ch+1. Filled only when requested.
  Eigen::Matrix<double, Eigen::Dynamic, 6, Eigen::RowMajor> jacobians;
  std::vector<std::uint8_t> valid;
  bool has_jacobians = false;
};

/// Bilinear lookup at fractional (row, col) coordinates. Columns wrap around
/// the azimuth seam; rows clamp to the image border. Non-finite coordinates
/// yield a zero value with the valid flag cleared.
SampleResult bilinear_sample(const Panorama& image, const CoordMatrix& coords,
                             bool with_jacobian = false);

/// Mean color residual between the cloud and the image at the given pose:
/// each point is transformed into the camera frame, projected, and compared
/// against the bilinearly sampled image color; the result averages the
/// Euclidean color distances over valid points. Returns kSentinelLoss when no
/// point projects validly.
double sampling_loss(const PointCloud& cloud, const Panorama& image, const Pose& pose);

struct LossGradient {
  double loss = 0.0;
  Vec3 d_omega = Vec3::Zero();
  Vec3 d_tau = Vec3::Zero();
  Eigen::Index n_valid = 0;
};

/// Loss plus its analytic gradient in the local parametrization
/// (exp(skew(omega)) * base_rotation, tau). The reported loss uses the exact
/// per-point norm; the gradient smooths it as sqrt(s + 1e-16) so zero
/// residuals stay differentiable. When no point is valid the loss is
/// kSentinelLoss and both gradients are zero.
LossGradient sampling_loss_grad(const PointCloud& cloud, const Panorama& image,
                                const LocalPoseParam& param);

}  // namespace omniloc
