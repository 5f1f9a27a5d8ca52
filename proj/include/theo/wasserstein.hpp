#pragma once

#include <span>
#include <vector>

namespace theo {

/// Uniformly weighted one-dimensional sample set.
class EmpiricalMeasure {
 public:
  /// Throws std::invalid_argument on an empty or non-finite sample.
  explicit EmpiricalMeasure(std::vector<double> samples);

  std::size_t size() const { return sorted_.size(); }
  std::span<const double> sorted() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

/// Order-p Wasserstein distance between two 1-D empirical measures, computed
/// exactly from the quantile coupling. For equal sizes this is
/// ((1/N) sum_i |a_(i) - b_(i)|^p)^(1/p); unequal sizes are handled by
/// integrating over the merged quantile breakpoints, with no resampling.
double wasserstein_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                      double p);

double w1_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b);
double w2_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

}  // namespace theo
