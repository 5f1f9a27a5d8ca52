#pragma once

#include <cstdint>
#include <span>

#include "theo/vector_ops.hpp"

namespace theo {

// Adaptive baselines of the form
//   theta <- theta - lr * m_n / (eps + sqrt(V_n))
// with element-wise moment estimates. Each step function takes its state by
// reference and returns the new iterate; states start empty and size
// themselves on the first step.

struct MomentumState {
  double momentum = 0.0;  ///< in [0, 1); 0 is plain SGD
  ParamVector velocity;
};

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool bias_correction = true;  ///< false gives the uncorrected sums
  ParamVector first_moment;
  ParamVector second_moment;
  std::uint64_t step_count = 0;
};

struct AmsGradState {
  AdamState adam;
  ParamVector max_second_moment;  ///< running max of the raw second moment
};

struct RmsPropState {
  double alpha = 0.99;  ///< smoothing of the squared gradient
  double eps = 1e-8;    ///< added outside the square root
  ParamVector second_moment;
};

/// velocity <- momentum * velocity + g;  theta <- theta - lr * velocity.
ParamVector sgd_step(std::span<const double> theta, std::span<const double> grad,
                     double lr, MomentumState& state);

ParamVector adam_step(std::span<const double> theta,
                      std::span<const double> grad, double lr,
                      AdamState& state);

/// As adam_step, but the denominator uses max(v_hat_{n-1}, v_n).
ParamVector amsgrad_step(std::span<const double> theta,
                         std::span<const double> grad, double lr,
                         AmsGradState& state);

ParamVector rmsprop_step(std::span<const double> theta,
                         std::span<const double> grad, double lr,
                         RmsPropState& state);

}  // namespace theo
