#include "theo/class_properties.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace theo {

PropertyReport check_class_properties(const GradientMap& transform,
                                      const RawGradient& raw,
                                      const ProbeSpec& spec) {
  if (spec.thetas.empty()) throw std::invalid_argument("class properties: empty probe set");
  if (spec.lambdas.empty()) throw std::invalid_argument("class properties: empty lambda list");
  if (!spec.draw) throw std::invalid_argument("class properties: no data sampler");

  auto data_norm = [&](const Sample& s) {
    return spec.data_norm ? spec.data_norm(s) : norm2(s.x);
  };

  PropertyReport report;
  std::size_t far = 0;
  for (std::size_t i = 0; i < spec.thetas.size(); ++i) {
    const double n = norm2(spec.thetas[i]);
    if (n > report.largest_theta_norm) {
      report.largest_theta_norm = n;
      far = i;
    }
  }
  const ParamVector& far_theta = spec.thetas[far];
  const double far_norm = report.largest_theta_norm;
  report.liminf_pass = far_norm > 0.0;

  for (std::size_t li = 0; li < spec.lambdas.size(); ++li) {
    const double lambda = spec.lambdas[li];
    LambdaFit fit;
    fit.lambda = lambda;
    RandomStream rng(derive_seed(spec.seed, li));
    for (const ParamVector& theta : spec.thetas) {
      const double tn = norm2(theta);
      for (std::size_t k = 0; k < spec.samples_per_theta; ++k) {
        const Sample x = spec.draw(rng);
        const double xn = data_norm(x);
        const ParamVector g_lambda = transform(theta, x, lambda);
        const ParamVector g = raw(theta, x);
        const double size = norm2(g_lambda);
        fit.k_lambda = std::max(
            fit.k_lambda, size / (std::pow(1.0 + xn, spec.rho1) * (1.0 + tn)));
        ParamVector diff(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) diff[i] = g_lambda[i] - g[i];
        const double dev = norm2(diff);
        fit.max_deviation = std::max(fit.max_deviation, dev);
        fit.k2 = std::max(fit.k2, dev / (std::pow(lambda, spec.gamma) *
                                         std::pow(1.0 + xn, spec.rho2) *
                                         std::pow(1.0 + tn, spec.rho3)));
      }
    }

    if (far_norm > 0.0) {
      const double scale = std::pow(far_norm, spec.delta);
      double sum = 0.0, sum_sq = 0.0;
      for (std::size_t k = 0; k < spec.liminf_samples; ++k) {
        const Sample x = spec.draw(rng);
        const ParamVector g_lambda = transform(far_theta, x, lambda);
        const double term = dot(far_theta, g_lambda) / scale -
                            2.0 * lambda * dot(g_lambda, g_lambda) / scale;
        sum += term;
        sum_sq += term * term;
      }
      const auto n = static_cast<double>(std::max<std::size_t>(spec.liminf_samples, 1));
      fit.liminf_estimate = sum / n;
      const double var = std::max(0.0, sum_sq / n - fit.liminf_estimate * fit.liminf_estimate);
      fit.liminf_stderr = std::sqrt(var / n);
      fit.liminf_positive = fit.liminf_estimate > 0.0;
    }
    report.liminf_pass = report.liminf_pass && fit.liminf_positive;
    report.fits.push_back(fit);
  }
  return report;
}

GradientMap theo_poula_map(const Problem& problem, double boost_floor,
                           double reg_strength, int reg_exponent) {
  return [&problem, boost_floor, reg_strength, reg_exponent](
             std::span<const double> theta, const Sample& x, double lambda) {
    HyperParams hp;
    hp.step_size = lambda;
    hp.boost_floor = boost_floor;
    hp.reg_strength = reg_strength;
    hp.reg_exponent = reg_exponent;
    return theo_poula_drift(theta, problem.stochastic_gradient(theta, x), hp);
  };
}

ProbeSpec probe_for(const Problem& problem, std::vector<ParamVector> thetas,
                    std::vector<double> lambdas) {
  ProbeSpec spec;
  spec.thetas = std::move(thetas);
  spec.lambdas = std::move(lambdas);
  spec.draw = [&problem](RandomStream& rng) { return problem.draw(rng); };
  spec.data_norm = [](const Sample& s) { return norm2(s.x); };
  return spec;
}

}  // namespace theo
