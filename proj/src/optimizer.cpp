#include "omniloc/optimizer.hpp"

#include "omniloc/sampler.hpp"

#include <cmath>
#include <stdexcept>

namespace omniloc {

Vec6 adam_step(AdamState& state, const Vec6& grad) {
  state.step_count += 1;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(state.beta1, state.step_count);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step_count);
  Vec6 step;
  for (int k = 0; k < 6; ++k) {
    const double m_hat = state.m[k] / bc1;
    const double v_hat = state.v[k] / bc2;
    step[k] = state.alpha * m_hat / (std::sqrt(v_hat) + state.eps);
  }
  return step;
}

void scheduler_update(SchedulerState& sched, AdamState& adam, double new_loss) {
  if (new_loss < sched.best_loss) {
    sched.best_loss = new_loss;
    sched.stall_count = 0;
    return;
  }
  sched.stall_count += 1;
  if (sched.stall_count >= sched.patience) {
    adam.alpha *= sched.decay_factor;
    sched.stall_count = 0;
  }
}

RefinementTrace refine(const PointCloud& cloud, const Panorama& image, const Pose& start,
                       int n_iter, double alpha0, bool gravity_known, double decay_factor,
                       int patience) {
  if (n_iter < 0) throw std::invalid_argument("iteration count must be non-negative");
  start.validate();

  RefinementTrace trace;
  trace.loss_history.reserve(static_cast<std::size_t>(n_iter) + 1);

  LocalPoseParam param;
  param.base_rotation = start.rotation;
  param.tau = start.translation;

  AdamState adam;
  adam.alpha = alpha0;
  SchedulerState sched;
  sched.decay_factor = decay_factor;
  sched.patience = patience;

  LossGradient g = sampling_loss_grad(cloud, image, param);
  trace.loss_history.push_back(g.loss);
  sched.best_loss = g.loss;

  // The loss floor near an optimum is noisy, so the last iterate can sit a
  // step above the best pose visited; report the best one instead.
  LocalPoseParam best_param = param;
  double best_loss = g.loss;

  bool frozen = !std::isfinite(g.loss);
  for (int it = 0; it < n_iter; ++it) {
    if (frozen) {
      trace.loss_history.push_back(kSentinelLoss);
      continue;
    }
    Vec6 grad;
    grad.head<3>() = g.d_omega;
    grad.tail<3>() = g.d_tau;
    if (gravity_known) {
      grad[0] = 0.0;
      grad[1] = 0.0;
    }
    const Vec6 step = adam_step(adam, grad);
    param.omega -= step.head<3>();
    param.tau -= step.tail<3>();
    if (gravity_known) {
      param.omega[0] = 0.0;
      param.omega[1] = 0.0;
    }
    g = sampling_loss_grad(cloud, image, param);
    trace.loss_history.push_back(g.loss);
    if (!std::isfinite(g.loss)) {
      frozen = true;
      continue;
    }
    if (g.loss < best_loss) {
      best_loss = g.loss;
      best_param = param;
    }
    scheduler_update(sched, adam, g.loss);
  }

  trace.final_param = best_param;
  trace.final_loss = best_loss;
  return trace;
}

}  // namespace omniloc
