#pragma once

#include <limits>
#include <span>
#include <string>

#include "theo/random.hpp"
#include "theo/vector_ops.hpp"

namespace theo {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Knobs of the tamed, boosted polygonal Langevin step.
///
/// inverse_temperature == +inf switches the Gaussian noise off.
/// boost_floor == +inf removes the boosting factor (tamed-only ablation).
struct HyperParams {
  double step_size = 0.1;
  double inverse_temperature = 1e12;
  double boost_floor = 0.1;
  double reg_strength = 0.0;
  int reg_exponent = 1;

  bool noise_enabled() const { return inverse_temperature != kInfinity; }
  double noise_scale() const;

  /// Throws std::invalid_argument naming the violated bound. Regularization
  /// with reg_exponent == 0 is rejected: the drift would be merely linear.
  void validate() const;
};

/// One coordinate of the tamed, boosted gradient:
///   g / (1 + sqrt(lambda)|g|) * (1 + sqrt(lambda) / (eps + |g|)).
/// Bounded by 1/sqrt(lambda) + sqrt(lambda) for every finite g.
double tamed_boosted_coord(double g, double step_size, double boost_floor);

/// Tamed regularization drift for one coordinate:
///   eta * theta_i * |theta|^{2r} / (1 + sqrt(lambda) |theta|^{2r}),
/// where |theta| is the norm of the whole iterate. Once |theta|^{2r}
/// overflows the ratio is taken at its limit eta * theta_i / sqrt(lambda).
double regularization_drift_coord(double theta_i, double theta_norm,
                                  double step_size, double reg_strength,
                                  int reg_exponent);

/// The full drift vector H(theta, x) given the raw stochastic gradient g.
ParamVector theo_poula_drift(std::span<const double> theta,
                             std::span<const double> grad,
                             const HyperParams& hp);

/// theta - lambda * H(theta, x) + sqrt(2 lambda / beta) * xi.
/// Draws exactly theta.size() normals from `noise`, in coordinate order,
/// unless noise is disabled, in which case `noise` is untouched.
ParamVector theo_poula_step(std::span<const double> theta,
                            std::span<const double> grad,
                            const HyperParams& hp, NoiseSource& noise);

}  // namespace theo
