#include "theo/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace theo {

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> samples)
    : sorted_(std::move(samples)) {
  if (sorted_.empty()) throw std::invalid_argument("empirical measure: no samples");
  for (double v : sorted_)
    if (!std::isfinite(v))
      throw std::invalid_argument("empirical measure: non-finite sample");
  std::sort(sorted_.begin(), sorted_.end());
}

double wasserstein_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                      double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("wasserstein: order must be >= 1");
  const auto xs = a.sorted();
  const auto ys = b.sorted();
  const std::size_t n = xs.size(), m = ys.size();
  double acc = 0.0;
  if (n == m) {
    for (std::size_t i = 0; i < n; ++i) acc += std::pow(std::abs(xs[i] - ys[i]), p);
    acc /= static_cast<double>(n);
  } else {
    // Quantile levels advance in units of 1/(n*m): atom i of a covers
    // [i*m, (i+1)*m), atom j of b covers [j*n, (j+1)*n).
    std::size_t i = 0, j = 0, level = 0;
    const std::size_t total = n * m;
    while (level < total) {
      const std::size_t next = std::min((i + 1) * m, (j + 1) * n);
      acc += static_cast<double>(next - level) * std::pow(std::abs(xs[i] - ys[j]), p);
      level = next;
      if (level == (i + 1) * m) ++i;
      if (level == (j + 1) * n) ++j;
    }
    acc /= static_cast<double>(total);
  }
  return p == 1.0 ? acc : std::pow(acc, 1.0 / p);
}

double w1_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  return wasserstein_1d(a, b, 1.0);
}

double w2_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  const auto xs = a.sorted();
  const auto ys = b.sorted();
  if (xs.size() != ys.size()) return wasserstein_1d(a, b, 2.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) acc += (xs[i] - ys[i]) * (xs[i] - ys[i]);
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

}  // namespace theo
