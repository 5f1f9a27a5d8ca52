#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "theo/problems.hpp"
#include "theo/random.hpp"
#include "theo/theo_poula.hpp"
#include "theo/vector_ops.hpp"

namespace theo {

/// Step-size dependent surrogate G_lambda(theta, x) for the raw gradient.
using GradientMap = std::function<ParamVector(std::span<const double> theta,
                                              const Sample& x, double lambda)>;
using RawGradient =
    std::function<ParamVector(std::span<const double> theta, const Sample& x)>;
using DataDraw = std::function<Sample(RandomStream&)>;

/// Where and how hard to probe the three defining growth/approximation/
/// dissipativity properties of a polygonal scheme.
struct ProbeSpec {
  std::vector<ParamVector> thetas;  ///< should include large |theta|
  std::vector<double> lambdas;
  DataDraw draw;
  /// Norm of the data point used in the (1 + |x|)^rho factors.
  std::function<double(const Sample&)> data_norm;
  std::size_t samples_per_theta = 64;
  std::size_t liminf_samples = 20000;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double rho3 = 0.0;
  double gamma = 0.5;
  int delta = 2;
  std::uint64_t seed = 1;
};

struct LambdaFit {
  double lambda = 0.0;
  /// Smallest K with |G_l| <= K (1 + |x|)^rho1 (1 + |theta|) on the probes.
  double k_lambda = 0.0;
  /// Largest |G_l - G| seen.
  double max_deviation = 0.0;
  /// Smallest K2 with |G_l - G| <= lambda^gamma K2 (1+|x|)^rho2 (1+|theta|)^rho3.
  double k2 = 0.0;
  /// Monte-Carlo mean of <theta/|theta|^delta, G_l> - 2 lambda |G_l|^2 / |theta|^delta
  /// at the largest probed |theta|, and its standard error.
  double liminf_estimate = 0.0;
  double liminf_stderr = 0.0;
  bool liminf_positive = false;
};

struct PropertyReport {
  static constexpr const char* kLabel = "statistical evidence, not proof";
  std::string label = kLabel;
  std::string note =
      "the liminf over |theta| -> infinity is probed at a finite radius only";
  std::vector<LambdaFit> fits;
  double largest_theta_norm = 0.0;
  bool liminf_pass = false;  ///< every lambda gave a positive estimate
};

/// Throws std::invalid_argument on an empty probe set or lambda list.
PropertyReport check_class_properties(const GradientMap& transform,
                                      const RawGradient& raw,
                                      const ProbeSpec& spec);

/// G_lambda of TH-eps-O POULA around a problem's stochastic gradient.
GradientMap theo_poula_map(const Problem& problem, double boost_floor,
                           double reg_strength = 0.0, int reg_exponent = 1);

/// The probe spec for a problem with the given theta grid: data from the
/// problem's sampler, |x| from the scalar sample (0 for mini-batches).
ProbeSpec probe_for(const Problem& problem, std::vector<ParamVector> thetas,
                    std::vector<double> lambdas);

}  // namespace theo
