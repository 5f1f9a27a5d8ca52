#include "theo/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace theo {
namespace {

void check_inputs(std::span<const double> theta, std::span<const double> grad,
                  const char* who) {
  require_same_dim(theta.size(), grad.size(), who);
  require_finite(theta, who);
  require_finite(grad, who);
}

void ensure_size(ParamVector& v, std::size_t d, const char* who) {
  if (v.empty()) {
    v.assign(d, 0.0);
    return;
  }
  require_same_dim(v.size(), d, who);
}

void check_beta(double b, const char* what) {
  if (!(b >= 0.0 && b < 1.0))
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1)");
}

// Shared Adam/AMSGrad moment update; returns the bias-correction factors.
std::pair<double, double> update_moments(std::span<const double> grad,
                                         AdamState& s, const char* who) {
  check_beta(s.beta1, "beta1");
  check_beta(s.beta2, "beta2");
  ensure_size(s.first_moment, grad.size(), who);
  ensure_size(s.second_moment, grad.size(), who);
  ++s.step_count;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    s.first_moment[i] = s.beta1 * s.first_moment[i] + (1.0 - s.beta1) * grad[i];
    s.second_moment[i] =
        s.beta2 * s.second_moment[i] + (1.0 - s.beta2) * grad[i] * grad[i];
  }
  if (!s.bias_correction) return {1.0, 1.0};
  const auto n = static_cast<double>(s.step_count);
  return {1.0 - std::pow(s.beta1, n), 1.0 - std::pow(s.beta2, n)};
}

}  // namespace

ParamVector sgd_step(std::span<const double> theta, std::span<const double> grad,
                     double lr, MomentumState& state) {
  check_inputs(theta, grad, "sgd_step");
  check_beta(state.momentum, "momentum");
  ensure_size(state.velocity, theta.size(), "sgd_step");
  ParamVector next(theta.begin(), theta.end());
  for (std::size_t i = 0; i < next.size(); ++i) {
    state.velocity[i] = state.momentum * state.velocity[i] + grad[i];
    next[i] -= lr * state.velocity[i];
  }
  return next;
}

ParamVector adam_step(std::span<const double> theta,
                      std::span<const double> grad, double lr,
                      AdamState& state) {
  check_inputs(theta, grad, "adam_step");
  const auto [bc1, bc2] = update_moments(grad, state, "adam_step");
  const double root_bc2 = std::sqrt(bc2);
  ParamVector next(theta.begin(), theta.end());
  for (std::size_t i = 0; i < next.size(); ++i) {
    const double denom = std::sqrt(state.second_moment[i]) / root_bc2 + state.eps;
    next[i] -= lr / bc1 * state.first_moment[i] / denom;
  }
  return next;
}

ParamVector amsgrad_step(std::span<const double> theta,
                         std::span<const double> grad, double lr,
                         AmsGradState& state) {
  check_inputs(theta, grad, "amsgrad_step");
  AdamState& s = state.adam;
  const auto [bc1, bc2] = update_moments(grad, s, "amsgrad_step");
  ensure_size(state.max_second_moment, theta.size(), "amsgrad_step");
  const double root_bc2 = std::sqrt(bc2);
  ParamVector next(theta.begin(), theta.end());
  for (std::size_t i = 0; i < next.size(); ++i) {
    state.max_second_moment[i] =
        std::max(state.max_second_moment[i], s.second_moment[i]);
    const double denom =
        std::sqrt(state.max_second_moment[i]) / root_bc2 + s.eps;
    next[i] -= lr / bc1 * s.first_moment[i] / denom;
  }
  return next;
}

ParamVector rmsprop_step(std::span<const double> theta,
                         std::span<const double> grad, double lr,
                         RmsPropState& state) {
  check_inputs(theta, grad, "rmsprop_step");
  check_beta(state.alpha, "alpha");
  ensure_size(state.second_moment, theta.size(), "rmsprop_step");
  ParamVector next(theta.begin(), theta.end());
  for (std::size_t i = 0; i < next.size(); ++i) {
    state.second_moment[i] = state.alpha * state.second_moment[i] +
                             (1.0 - state.alpha) * grad[i] * grad[i];
    next[i] -= lr * grad[i] / (std::sqrt(state.second_moment[i]) + state.eps);
  }
  return next;
}

}  // namespace theo
