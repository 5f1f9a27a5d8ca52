#include "theo/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace theo {
namespace {

// Exponentiation by squaring in extended precision; one rounding to double
// at the end keeps theta^29 and theta^30 within a few ulps.
long double ipow(long double base, unsigned exp) {
  long double result = 1.0L;
  while (exp != 0) {
    if (exp & 1U) result *= base;
    base *= base;
    exp >>= 1U;
  }
  return result;
}

double data_weight(double x) { return x <= 1.0 ? 2.0 : 1.0; }

double sign(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

double scalar_of(std::span<const double> theta, const char* who) {
  if (theta.size() != 1)
    throw std::invalid_argument(std::string(who) + ": expected dimension 1");
  return theta[0];
}

}  // namespace

double motivating_gradient(double theta, double x) {
  const long double poly = 30.0L * ipow(theta, 29);
  const long double w = data_weight(x);
  if (std::abs(theta) <= 1.0)
    return static_cast<double>(2.0L * theta * w + poly);
  return static_cast<double>(2.0L * w * sign(theta) + poly);
}

double motivating_sample_objective(double theta, double x) {
  const long double poly = ipow(theta, 30);
  const long double w = data_weight(x);
  const long double a = std::abs(theta);
  if (a <= 1.0L) return static_cast<double>(a * a * w + poly);
  return static_cast<double>((2.0L * a - 1.0L) * w + poly);
}

double motivating_objective(double theta) {
  const long double poly = ipow(theta, 30);
  const long double a = std::abs(theta);
  if (a <= 1.0L) return static_cast<double>(poly + 1.75L * a * a);
  return static_cast<double>(poly + 1.75L * (2.0L * a - 1.0L));
}

double motivating_true_gradient(double theta) {
  const long double poly = 30.0L * ipow(theta, 29);
  if (std::abs(theta) <= 1.0) return static_cast<double>(poly + 3.5L * theta);
  return static_cast<double>(poly + 3.5L * sign(theta));
}

Sample MotivatingProblem::draw(RandomStream& data) const {
  return Sample{{data.uniform(-2.0, 2.0)}, {}};
}

ParamVector MotivatingProblem::stochastic_gradient(std::span<const double> theta,
                                                   const Sample& sample) const {
  if (sample.x.size() != 1)
    throw std::invalid_argument("motivating: sample must hold one scalar");
  return {motivating_gradient(scalar_of(theta, "motivating"), sample.x[0])};
}

double MotivatingProblem::sample_objective(std::span<const double> theta,
                                           const Sample& sample) const {
  if (sample.x.size() != 1)
    throw std::invalid_argument("motivating: sample must hold one scalar");
  return motivating_sample_objective(scalar_of(theta, "motivating"), sample.x[0]);
}

double MotivatingProblem::objective(std::span<const double> theta) const {
  return motivating_objective(scalar_of(theta, "motivating"));
}

ParamVector MotivatingProblem::expected_gradient(
    std::span<const double> theta) const {
  return {motivating_true_gradient(scalar_of(theta, "motivating"))};
}

std::optional<Optimum> MotivatingProblem::optimum() const {
  return Optimum{{0.0}, 0.0};
}

QuadraticProblem::QuadraticProblem(double curvature, std::size_t dimension)
    : curvature_(curvature), dim_(dimension) {
  if (!(curvature > 0.0) || !std::isfinite(curvature))
    throw std::invalid_argument("quadratic: curvature must be finite and > 0");
  if (dimension == 0) throw std::invalid_argument("quadratic: dimension must be >= 1");
}

ParamVector QuadraticProblem::stochastic_gradient(std::span<const double> theta,
                                                  const Sample&) const {
  return expected_gradient(theta);
}

double QuadraticProblem::objective(std::span<const double> theta) const {
  require_same_dim(theta.size(), dim_, "quadratic");
  return 0.5 * curvature_ * dot(theta, theta);
}

ParamVector QuadraticProblem::expected_gradient(
    std::span<const double> theta) const {
  require_same_dim(theta.size(), dim_, "quadratic");
  ParamVector g(theta.begin(), theta.end());
  for (double& v : g) v *= curvature_;
  return g;
}

std::optional<Optimum> QuadraticProblem::optimum() const {
  return Optimum{ParamVector(dim_, 0.0), 0.0};
}

std::vector<std::shared_ptr<const Problem>> builtin_problems() {
  MlpSpec small;
  small.layers = {3, 8, 2};
  small.dataset_size = 32;
  small.batch_size = 8;
  return {std::make_shared<MotivatingProblem>(),
          std::make_shared<QuadraticProblem>(1.0),
          std::make_shared<QuadraticProblem>(2.0, 3),
          std::make_shared<MlpProblem>(MlpSpec{}),
          std::make_shared<MlpProblem>(small)};
}

}  // namespace theo
