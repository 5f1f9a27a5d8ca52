#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "theo/random.hpp"

namespace theo {

/// Deterministic ground truth for a one-dimensional Gibbs measure
/// pi(dz) ∝ exp(-beta u(z)) on a truncated interval, built by trapezoidal
/// quadrature on a uniform grid.
class GibbsOracle1D {
 public:
  static constexpr std::size_t kDefaultGrid = std::size_t{1} << 14;
  static constexpr double kMaxTruncationMass = 1e-6;

  /// Throws std::domain_error if u is non-finite on the grid, the shifted
  /// mass vanishes, or the estimated mass outside [lo, hi] exceeds 1e-6.
  static GibbsOracle1D build(const std::function<double(double)>& u,
                             double beta, double lo, double hi,
                             std::size_t n_grid = kDefaultGrid);

  double lo() const { return grid_.front(); }
  double hi() const { return grid_.back(); }
  double beta() const { return beta_; }
  std::span<const double> grid() const { return grid_; }
  std::span<const double> density() const { return density_; }
  std::span<const double> cdf() const { return cdf_; }

  /// Estimated probability mass lying outside [lo, hi].
  double truncation_mass() const { return truncation_mass_; }

  double expectation(const std::function<double(double)>& f) const;
  /// Raw moment E[Z^p].
  double moment(int p) const;
  double mean() const { return moment(1); }
  double variance() const;

  /// Inverse CDF with linear interpolation inside each grid cell.
  double quantile(double u) const;
  std::vector<double> sample(std::size_t n, RandomStream& rng) const;
  /// Quantiles at (i + 0.5) / n: a low-discrepancy sample of size n.
  std::vector<double> stratified_sample(std::size_t n) const;

 private:
  std::vector<double> grid_;
  std::vector<double> density_;
  std::vector<double> cdf_;
  double beta_ = 1.0;
  double step_ = 0.0;
  double truncation_mass_ = 0.0;
};

}  // namespace theo
