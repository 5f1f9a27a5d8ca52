#include "theo/theo_poula.hpp"

#include <cmath>
#include <stdexcept>

namespace theo {

double HyperParams::noise_scale() const {
  if (!noise_enabled()) return 0.0;
  return std::sqrt(2.0 * step_size / inverse_temperature);
}

void HyperParams::validate() const {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("invalid hyperparameters: " + msg);
  };
  if (!(step_size > 0.0) || !std::isfinite(step_size))
    fail("step_size must be finite and > 0");
  if (!(inverse_temperature > 0.0))
    fail("inverse_temperature must be > 0 (inf disables noise)");
  if (!(boost_floor > 0.0)) fail("boost_floor must be > 0 (inf disables boosting)");
  if (!(reg_strength >= 0.0 && reg_strength < 1.0))
    fail("reg_strength must lie in [0, 1)");
  if (reg_exponent < 0) fail("reg_exponent must be >= 0");
  if (reg_strength > 0.0 && reg_exponent < 1)
    fail("reg_exponent must be >= 1 when reg_strength > 0");
}

double tamed_boosted_coord(double g, double step_size, double boost_floor) {
  if (!std::isfinite(g))
    throw std::domain_error("tamed_boosted_coord: non-finite gradient");
  const double root = std::sqrt(step_size);
  const double mag = std::abs(g);
  // boost_floor == inf gives a boost of exactly 1.
  const double boost = 1.0 + root / (boost_floor + mag);
  return g / (1.0 + root * mag) * boost;
}

double regularization_drift_coord(double theta_i, double theta_norm,
                                  double step_size, double reg_strength,
                                  int reg_exponent) {
  if (reg_strength == 0.0 || theta_i == 0.0) return 0.0;
  const double root = std::sqrt(step_size);
  const double log_norm = std::log(theta_norm);
  const double power_log = 2.0 * reg_exponent * log_norm;
  if (power_log > 700.0) {
    // |theta|^{2r} is beyond double range; ratio is at its saturated limit.
    return reg_strength * theta_i / root;
  }
  const double power = std::pow(theta_norm, 2 * reg_exponent);
  return reg_strength * theta_i * power / (1.0 + root * power);
}

ParamVector theo_poula_drift(std::span<const double> theta,
                             std::span<const double> grad,
                             const HyperParams& hp) {
  require_same_dim(theta.size(), grad.size(), "theo_poula_drift");
  require_finite(theta, "theo_poula_drift theta");
  require_finite(grad, "theo_poula_drift gradient");
  const double norm = hp.reg_strength > 0.0 ? norm2(theta) : 0.0;
  ParamVector drift(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    drift[i] = tamed_boosted_coord(grad[i], hp.step_size, hp.boost_floor) +
               regularization_drift_coord(theta[i], norm, hp.step_size,
                                          hp.reg_strength, hp.reg_exponent);
  }
  return drift;
}

ParamVector theo_poula_step(std::span<const double> theta,
                            std::span<const double> grad,
                            const HyperParams& hp, NoiseSource& noise) {
  ParamVector next = theo_poula_drift(theta, grad, hp);
  const double scale = hp.noise_scale();
  for (std::size_t i = 0; i < next.size(); ++i) {
    next[i] = theta[i] - hp.step_size * next[i];
    if (hp.noise_enabled()) next[i] += scale * noise.normal();
  }
  return next;
}

}  // namespace theo
