#include "theo/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <boost/multiprecision/cpp_int.hpp>

namespace theo {
namespace {

using boost::multiprecision::cpp_int;

cpp_int binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  cpp_int c = 1;
  // Each partial product c * (n - i) / (i + 1) is itself a binomial, so the
  // division is exact.
  for (unsigned i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
  return c;
}

// Exact dyadic decomposition of a positive finite double: value = m * 2^e.
std::pair<cpp_int, int> decompose(double v) {
  int exp = 0;
  const double frac = std::frexp(v, &exp);
  const auto mant = static_cast<std::int64_t>(std::ldexp(frac, 53));
  return {cpp_int(mant), exp - 53};
}

unsigned bit_length(const cpp_int& v) {
  return v == 0 ? 0U : static_cast<unsigned>(boost::multiprecision::msb(v)) + 1U;
}

// num / den correctly rounded (nearest, ties to even) for positive values in
// the normal double range.
double rational_to_double(const cpp_int& num, const cpp_int& den) {
  const int shift = 54 - (static_cast<int>(bit_length(num)) -
                          static_cast<int>(bit_length(den)));
  cpp_int scaled_num = num, scaled_den = den;
  if (shift >= 0) scaled_num <<= shift; else scaled_den <<= -shift;
  cpp_int q = scaled_num / scaled_den;
  cpp_int rem = scaled_num - q * scaled_den;
  int exp = -shift;
  // Normalize q to exactly 54 bits, folding any dropped bit into `sticky`.
  bool sticky = rem != 0;
  while (bit_length(q) > 54) {
    sticky = sticky || ((q & 1) != 0);
    q >>= 1;
    ++exp;
  }
  // Round 54 bits down to 53.
  const bool half = (q & 1) != 0;
  q >>= 1;
  ++exp;
  if (half && (sticky || (q & 1) != 0)) q += 1;
  return std::ldexp(static_cast<double>(q.convert_to<std::uint64_t>()), exp);
}

}  // namespace

std::string exact_binomial(unsigned n, unsigned k) {
  return binomial(n, k).str();
}

double lambda_max(double eta, int r) {
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw std::invalid_argument("lambda_max: eta must be finite and > 0");
  if (r < 0) throw std::invalid_argument("lambda_max: r must be >= 0");
  if (eta < 1e-300) return kInfinity;

  const unsigned l = 2U * static_cast<unsigned>(r) + 1U;
  const cpp_int c = binomial(8 * l, 4 * l);
  // eta^2 = m^2 2^(2e).  Both candidates are 1 / (K m^2 2^(2e)); compare the
  // integer factors K = 4 and K = 2^14 C^2 and keep the larger denominator.
  const auto [m, e] = decompose(eta);
  const cpp_int second_k = (cpp_int(1) << 14) * c * c;
  const cpp_int k = std::max(cpp_int(4), second_k);
  cpp_int num = 1, den = k * m * m;
  if (e >= 0) den <<= 2 * e; else num <<= -2 * e;
  return rational_to_double(num, den);
}

FiniteDiffResult finite_diff_check(const Problem& problem,
                                   std::span<const double> theta, double h,
                                   std::size_t n_coords, std::uint64_t seed,
                                   const Sample* fixed) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_check: h must be > 0");
  const std::size_t d = problem.dimension();
  require_same_dim(theta.size(), d, "finite_diff_check");

  std::vector<std::size_t> coords(d);
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (n_coords < d) {
    RandomStream rng(seed);
    for (std::size_t i = 0; i < n_coords; ++i)
      std::swap(coords[i], coords[i + rng.below(d - i)]);
    coords.resize(n_coords);
  }

  const ParamVector analytic = fixed ? problem.stochastic_gradient(theta, *fixed)
                                     : problem.expected_gradient(theta);
  auto value = [&](std::span<const double> at) {
    return fixed ? problem.sample_objective(at, *fixed) : problem.objective(at);
  };

  FiniteDiffResult result;
  ParamVector probe(theta.begin(), theta.end());
  for (std::size_t c : coords) {
    probe[c] = theta[c] + h;
    const double up = value(probe);
    probe[c] = theta[c] - h;
    const double down = value(probe);
    probe[c] = theta[c];
    const double numeric = (up - down) / (2.0 * h);
    const double denom =
        std::max({std::abs(numeric), std::abs(analytic[c]), kRelativeErrorFloor});
    const double err = std::abs(numeric - analytic[c]) / denom;
    if (err > result.max_relative_error || !std::isfinite(err)) {
      result.max_relative_error = err;
      result.worst_coordinate = c;
    }
  }
  result.coordinates_checked = coords.size();
  return result;
}

double moment_estimate(std::span<const ParamVector> trajectory, int p,
                       std::size_t burn_in) {
  if (p < 1) throw std::invalid_argument("moment_estimate: p must be >= 1");
  if (burn_in >= trajectory.size())
    throw std::invalid_argument("moment_estimate: empty window after burn-in");
  double acc = 0.0;
  for (std::size_t n = burn_in; n < trajectory.size(); ++n)
    acc += std::pow(norm2(trajectory[n]), p);
  return acc / static_cast<double>(trajectory.size() - burn_in);
}

double excess_risk_estimate(std::span<const ParamVector> trajectory,
                            const Problem& problem, std::size_t burn_in) {
  const auto opt = problem.optimum();
  if (!opt) throw std::invalid_argument("excess_risk_estimate: optimum unknown");
  if (burn_in >= trajectory.size())
    throw std::invalid_argument("excess_risk_estimate: empty window after burn-in");
  double acc = 0.0;
  for (std::size_t n = burn_in; n < trajectory.size(); ++n)
    acc += problem.objective(trajectory[n]);
  return acc / static_cast<double>(trajectory.size() - burn_in) - opt->value;
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& work) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = count * t / threads;
    const std::size_t end = count * (t + 1) / threads;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) work(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<double> simulate_endpoints(const Problem& problem,
                                       const ChainSpec& spec) {
  if (problem.dimension() != 1)
    throw std::invalid_argument("simulate_endpoints: one-dimensional problems only");
  if (spec.initial.size() != 1 && spec.initial.size() != spec.chains)
    throw std::invalid_argument("simulate_endpoints: initial must have 1 or `chains` entries");
  if (spec.steps < 0) throw std::invalid_argument("simulate_endpoints: negative step count");
  spec.hp.validate();

  std::vector<double> ends(spec.chains);
  parallel_for(spec.chains, spec.threads, [&](std::size_t c) {
    RandomStream data(derive_seed(spec.seed, 2 * c));
    NoiseSource noise(derive_seed(spec.seed, 2 * c + 1));
    ParamVector theta{spec.initial.size() == 1 ? spec.initial[0] : spec.initial[c]};
    for (std::int64_t n = 0; n < spec.steps; ++n) {
      const Sample s = problem.draw(data);
      const ParamVector g = problem.stochastic_gradient(theta, s);
      theta = theo_poula_step(theta, g, spec.hp, noise);
    }
    ends[c] = theta[0];
  });
  return ends;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("log_log_slope: size mismatch");
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

RateSweepResult rate_sweep(const Problem& problem, const GibbsOracle1D& oracle,
                           const RateSweepSpec& spec) {
  if (problem.dimension() != 1)
    throw std::invalid_argument("rate_sweep: one-dimensional problems only");
  if (spec.step_sizes.empty()) throw std::invalid_argument("rate_sweep: empty step-size list");
  if (spec.chains == 0) throw std::invalid_argument("rate_sweep: chains must be >= 1");

  const std::vector<double> reference = oracle.stratified_sample(spec.chains);
  const EmpiricalMeasure target(reference);

  RateSweepResult result;
  for (double lambda : spec.step_sizes) {
    ChainSpec chains;
    chains.hp = spec.hp;
    chains.hp.step_size = lambda;
    chains.steps = std::llround(spec.diffusion_time / lambda);
    chains.chains = spec.chains;
    chains.seed = spec.seed;
    chains.threads = spec.threads;
    if (spec.init_from_oracle) {
      RandomStream init(derive_seed(spec.seed, 0x1a17));
      chains.initial = oracle.sample(spec.chains, init);
    } else {
      chains.initial = {spec.initial};
    }
    const EmpiricalMeasure law(simulate_endpoints(problem, chains));
    result.rows.push_back({lambda, chains.steps, w1_1d(law, target), w2_1d(law, target)});
  }

  std::vector<double> xs, w1s, w2s;
  for (const auto& row : result.rows) {
    xs.push_back(row.step_size);
    w1s.push_back(row.w1);
    w2s.push_back(row.w2);
  }
  result.w1_slope = log_log_slope(xs, w1s);
  result.w2_slope = log_log_slope(xs, w2s);

  RandomStream floor_rng(derive_seed(spec.seed, 0xf1002));
  for (int rep = 0; rep < kNoiseFloorReplicates; ++rep)
    result.noise_floor_w1 =
        std::max(result.noise_floor_w1,
                 w1_1d(EmpiricalMeasure(oracle.sample(spec.chains, floor_rng)), target));
  return result;
}

double MomentTrace::sup_running() const {
  return running.empty() ? 0.0 : *std::max_element(running.begin(), running.end());
}

double MomentTrace::last_decade_variation() const {
  if (running.empty()) return 0.0;
  const double last = running.back();
  const std::int64_t start = checkpoints.back() / 10;
  double worst = 0.0;
  for (std::size_t i = 0; i < running.size(); ++i)
    if (checkpoints[i] >= start)
      worst = std::max(worst, std::abs(running[i] - last) / last);
  return worst;
}

MomentTrace second_moment_trace(const Problem& problem, const HyperParams& hp,
                                std::int64_t steps, std::size_t chains,
                                std::uint64_t seed, const ParamVector& initial,
                                unsigned threads) {
  hp.validate();
  if (steps < 1 || chains == 0)
    throw std::invalid_argument("second_moment_trace: need steps >= 1 and chains >= 1");
  require_same_dim(initial.size(), problem.dimension(), "second_moment_trace");

  MomentTrace trace;
  // Every step for the first thousand, then every hundredth.
  for (std::int64_t n = 1; n <= steps; n += (n < 1000 ? 1 : 100))
    trace.checkpoints.push_back(n);
  if (trace.checkpoints.back() != steps) trace.checkpoints.push_back(steps);

  const std::size_t k = trace.checkpoints.size();
  std::vector<std::vector<double>> sums(chains, std::vector<double>(k));
  std::vector<double> maxima(chains, 0.0);
  parallel_for(chains, threads, [&](std::size_t c) {
    RandomStream data(derive_seed(seed, 2 * c));
    NoiseSource noise(derive_seed(seed, 2 * c + 1));
    ParamVector theta = initial;
    double cumulative = 0.0;
    std::size_t next = 0;
    for (std::int64_t n = 1; n <= steps; ++n) {
      const Sample s = problem.draw(data);
      theta = theo_poula_step(theta, problem.stochastic_gradient(theta, s), hp, noise);
      const double sq = dot(theta, theta);
      cumulative += sq;
      maxima[c] = std::max(maxima[c], sq);
      if (trace.checkpoints[next] == n) sums[c][next++] = cumulative;
    }
  });

  trace.running.assign(k, 0.0);
  for (std::size_t c = 0; c < chains; ++c)
    for (std::size_t i = 0; i < k; ++i) trace.running[i] += sums[c][i];
  for (std::size_t i = 0; i < k; ++i)
    trace.running[i] /= static_cast<double>(chains) * static_cast<double>(trace.checkpoints[i]);
  trace.max_squared_norm = *std::max_element(maxima.begin(), maxima.end());
  return trace;
}

}  // namespace theo
