#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "theo/gibbs.hpp"
#include "theo/problems.hpp"
#include "theo/theo_poula.hpp"
#include "theo/wasserstein.hpp"

namespace theo {

/// Largest step size covered by the convergence guarantee:
///   min{ 1/(4 eta^2), 1/(2^14 eta^2 C(8l, 4l)^2) },  l = 2r + 1.
/// Evaluated in exact rational arithmetic and rounded once to double.
/// Returns +inf for eta < 1e-300; throws std::invalid_argument for eta <= 0
/// or r < 0.
double lambda_max(double eta, int r);

/// C(n, k) as a decimal string, exact for any size.
std::string exact_binomial(unsigned n, unsigned k);

/// Denominator floor used by finite_diff_check's relative error; below it
/// the error is effectively absolute.
inline constexpr double kRelativeErrorFloor = 1e-4;

struct FiniteDiffResult {
  double max_relative_error = 0.0;
  std::size_t worst_coordinate = 0;
  std::size_t coordinates_checked = 0;
};

/// Central differences of the objective against the analytic gradient on
/// `n_coords` coordinates chosen at random (all of them when n_coords >= d).
/// With `fixed` set, the per-sample loss and stochastic gradient on that
/// sample are compared instead of u and grad u.
FiniteDiffResult finite_diff_check(const Problem& problem,
                                   std::span<const double> theta, double h,
                                   std::size_t n_coords, std::uint64_t seed,
                                   const Sample* fixed = nullptr);

/// Time average of |theta_n|^p over the iterates after `burn_in`.
double moment_estimate(std::span<const ParamVector> trajectory, int p,
                       std::size_t burn_in);

/// Time average of u(theta_n) - u(theta*) after `burn_in`. Requires a known
/// optimum.
double excess_risk_estimate(std::span<const ParamVector> trajectory,
                            const Problem& problem, std::size_t burn_in);

/// Default burn-in: the first 20% of a trajectory.
inline std::size_t default_burn_in(std::size_t length) { return length / 5; }

/// Independent one-dimensional TH-eps-O POULA chains. Chain c uses data seed
/// derive_seed(seed, 2c) and noise seed derive_seed(seed, 2c + 1), so results
/// do not depend on how chains are split across threads.
struct ChainSpec {
  HyperParams hp;
  std::int64_t steps = 0;
  std::size_t chains = 1;
  std::uint64_t seed = 1;
  /// One value for every chain, or one per chain.
  std::vector<double> initial{0.0};
  unsigned threads = 0;  ///< 0 = hardware concurrency
};

/// End points theta_steps of every chain, ordered by chain index.
std::vector<double> simulate_endpoints(const Problem& problem,
                                       const ChainSpec& spec);

struct RateRow {
  double step_size = 0.0;
  std::int64_t steps = 0;
  double w1 = 0.0;
  double w2 = 0.0;
};

struct RateSweepResult {
  std::vector<RateRow> rows;
  double w1_slope = 0.0;  ///< log-log least-squares slope; NaN for one row
  double w2_slope = 0.0;
  /// Largest W1 between an i.i.d. oracle sample and the stratified oracle
  /// sample of the same size over kNoiseFloorReplicates draws (about the
  /// 95th percentile of pure sampling error).
  double noise_floor_w1 = 0.0;
};

inline constexpr int kNoiseFloorReplicates = 20;

struct RateSweepSpec {
  HyperParams hp;  ///< step_size is replaced by each entry of step_sizes
  std::vector<double> step_sizes;
  std::size_t chains = 10000;
  double diffusion_time = 10.0;  ///< steps = round(diffusion_time / lambda)
  std::uint64_t seed = 1;
  bool init_from_oracle = false;  ///< otherwise every chain starts at `initial`
  double initial = 0.0;
  unsigned threads = 0;
};

/// Distance between the pooled end-point law and the Gibbs oracle per step
/// size, at equal diffusion time. One-dimensional problems only.
RateSweepResult rate_sweep(const Problem& problem, const GibbsOracle1D& oracle,
                           const RateSweepSpec& spec);

double log_log_slope(std::span<const double> x, std::span<const double> y);

struct MomentTrace {
  std::vector<std::int64_t> checkpoints;
  /// (1 / (C n)) sum_c sum_{k<=n} |theta_k^c|^2 at each checkpoint.
  std::vector<double> running;
  /// Largest |theta_n|^2 seen by any chain at any step.
  double max_squared_norm = 0.0;

  double sup_running() const;
  /// max over checkpoints in [last/10, last] of |R(n) - R(last)| / R(last).
  double last_decade_variation() const;
};

/// Running second-moment estimate of TH-eps-O POULA chains from `initial`.
MomentTrace second_moment_trace(const Problem& problem, const HyperParams& hp,
                                std::int64_t steps, std::size_t chains,
                                std::uint64_t seed, const ParamVector& initial,
                                unsigned threads = 0);

/// Runs `work(i)` for i in [0, count) on up to `threads` worker threads.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& work);

}  // namespace theo
