#include "theo/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace theo {

GibbsOracle1D GibbsOracle1D::build(const std::function<double(double)>& u,
                                   double beta, double lo, double hi,
                                   std::size_t n_grid) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("gibbs: beta must be finite and > 0");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument("gibbs: need finite lo < hi");
  if (n_grid < 1024) throw std::invalid_argument("gibbs: n_grid must be >= 1024");

  GibbsOracle1D o;
  o.beta_ = beta;
  o.step_ = (hi - lo) / static_cast<double>(n_grid - 1);
  o.grid_.resize(n_grid);
  std::vector<double> energy(n_grid);
  for (std::size_t i = 0; i < n_grid; ++i) {
    o.grid_[i] = (i + 1 == n_grid) ? hi : lo + o.step_ * static_cast<double>(i);
    energy[i] = u(o.grid_[i]);
    if (!std::isfinite(energy[i]))
      throw std::domain_error("gibbs: objective is non-finite on the grid");
  }
  const double floor = *std::min_element(energy.begin(), energy.end());
  o.density_.resize(n_grid);
  for (std::size_t i = 0; i < n_grid; ++i)
    o.density_[i] = std::exp(-beta * (energy[i] - floor));

  o.cdf_.assign(n_grid, 0.0);
  for (std::size_t i = 1; i < n_grid; ++i)
    o.cdf_[i] = o.cdf_[i - 1] + 0.5 * o.step_ * (o.density_[i - 1] + o.density_[i]);
  const double mass = o.cdf_.back();
  if (!(mass > 0.0)) throw std::domain_error("gibbs: zero total mass");
  for (std::size_t i = 0; i < n_grid; ++i) {
    o.density_[i] /= mass;
    o.cdf_[i] /= mass;
  }

  // Exponential-tail estimate beyond each end: p(end) / (beta |u'(end)|),
  // with u' taken from the outermost cell. A non-confining slope means the
  // tail cannot be bounded.
  auto tail = [&](std::size_t edge, std::size_t inner, double outward) {
    const double slope = outward * (energy[edge] - energy[inner]) / o.step_;
    if (o.density_[edge] == 0.0) return 0.0;
    if (!(slope > 0.0)) return std::numeric_limits<double>::infinity();
    return o.density_[edge] / (beta * slope);
  };
  o.truncation_mass_ = tail(0, 1, 1.0) + tail(n_grid - 1, n_grid - 2, 1.0);
  if (!(o.truncation_mass_ < kMaxTruncationMass))
    throw std::domain_error("gibbs: truncation mass outside [lo, hi] too large; widen the interval");
  return o;
}

double GibbsOracle1D::expectation(const std::function<double(double)>& f) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const double w = (i == 0 || i + 1 == grid_.size()) ? 0.5 : 1.0;
    acc += w * f(grid_[i]) * density_[i];
  }
  return acc * step_;
}

double GibbsOracle1D::moment(int p) const {
  return expectation([p](double z) { return std::pow(z, p); });
}

double GibbsOracle1D::variance() const {
  const double m = mean();
  return expectation([m](double z) { return (z - m) * (z - m); });
}

double GibbsOracle1D::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("gibbs: quantile level outside [0, 1]");
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.begin()) return grid_.front();
  if (it == cdf_.end()) return grid_.back();
  const std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
  const double c0 = cdf_[i - 1], c1 = cdf_[i];
  const double t = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
  return grid_[i - 1] + t * (grid_[i] - grid_[i - 1]);
}

std::vector<double> GibbsOracle1D::sample(std::size_t n, RandomStream& rng) const {
  std::vector<double> out(n);
  for (double& v : out) v = quantile(rng.uniform());
  return out;
}

std::vector<double> GibbsOracle1D::stratified_sample(std::size_t n) const {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = quantile((static_cast<double>(i) + 0.5) / static_cast<double>(n));
  return out;
}

}  // namespace theo
