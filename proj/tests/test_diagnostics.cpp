#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "theo/diagnostics.hpp"
#include "theo/optimizer.hpp"

using namespace theo;

namespace {

double brute_force_wp(std::vector<double> a, const std::vector<double>& b, double p) {
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = kInfinity;
  do {
    double cost = 0;
    for (std::size_t i = 0; i < a.size(); ++i) cost += std::pow(std::abs(a[i] - b[perm[i]]), p);
    best = std::min(best, cost / a.size());
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::pow(best, 1.0 / p);
}

double quad(double z) { return 0.5 * z * z; }

std::vector<ParamVector> quadratic_chain(double beta, double lambda, std::int64_t steps,
                                         std::uint64_t seed) {
  QuadraticProblem q(1.0);
  HyperParams hp;
  hp.step_size = lambda;
  hp.inverse_temperature = beta;
  hp.boost_floor = 0.1;
  TheoPoulaOptimizer opt(hp, seed);
  RandomStream data(seed + 1);
  ParamVector th{0.0};
  std::vector<ParamVector> out;
  out.reserve(steps);
  for (std::int64_t i = 0; i < steps; ++i) {
    opt.step(th, q.stochastic_gradient(th, q.draw(data)));
    out.push_back(th);
  }
  return out;
}

}  // namespace

TEST(Gibbs, GaussianMoments) {
  const auto o = GibbsOracle1D::build(quad, 1.0, -8, 8);
  EXPECT_NEAR(o.variance(), 1.0, 1e-4);
  EXPECT_NEAR(o.moment(1), 0.0, 1e-10);
  EXPECT_NEAR(o.moment(3), 0.0, 1e-10);
  EXPECT_NEAR(o.moment(5), 0.0, 1e-9);
  EXPECT_NEAR(o.moment(2), 1.0, 1e-4);
  EXPECT_NEAR(o.moment(4), 3.0, 1e-4);
  EXPECT_NEAR(o.moment(6), 15.0, 1e-3);
  EXPECT_LT(o.truncation_mass(), 1e-6);
  const auto o4 = GibbsOracle1D::build(quad, 4.0, -8, 8);
  EXPECT_NEAR(o4.variance(), 0.25, 1e-4);
}

TEST(Gibbs, MotivatingIsSymmetric) {
  const auto o = GibbsOracle1D::build(motivating_objective, 10.0, -8, 8);
  EXPECT_NEAR(o.mean(), 0.0, 1e-6);
}

TEST(Gibbs, QuantilesAndSampling) {
  const auto o = GibbsOracle1D::build(quad, 1.0, -8, 8);
  EXPECT_NEAR(o.quantile(0.5), 0.0, 1e-6);
  EXPECT_NEAR(o.quantile(0.975), 1.959963984540054, 1e-4);
  const auto s = o.stratified_sample(1000);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  RandomStream rng(1);
  const auto iid = o.sample(20000, rng);
  double m2 = 0;
  for (double v : iid) m2 += v * v;
  EXPECT_NEAR(m2 / iid.size(), 1.0, 0.05);
}

TEST(Gibbs, RejectsHeavyTruncation) {
  EXPECT_THROW(GibbsOracle1D::build(quad, 1.0, -2, 2), std::domain_error);
  EXPECT_THROW(GibbsOracle1D::build(quad, 1.0, -8, 8, 100), std::invalid_argument);
}

TEST(Wasserstein, Examples) {
  const EmpiricalMeasure a({0.3, -1.0, 2.0});
  EXPECT_EQ(w1_1d(a, a), 0.0);
  EXPECT_EQ(w2_1d(a, a), 0.0);
  EXPECT_DOUBLE_EQ(w1_1d(EmpiricalMeasure({0, 1}), EmpiricalMeasure({1, 2})), 1.0);
  EXPECT_DOUBLE_EQ(w1_1d(EmpiricalMeasure({0}), EmpiricalMeasure({3})), 3.0);
  EXPECT_DOUBLE_EQ(w2_1d(EmpiricalMeasure({0}), EmpiricalMeasure({3})), 3.0);
  EXPECT_DOUBLE_EQ(w2_1d(EmpiricalMeasure({0, 0}), EmpiricalMeasure({-1, 1})), 1.0);
}

TEST(Wasserstein, MatchesBruteForce) {
  RandomStream rng(6);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng.below(6);
    std::vector<double> a(n), b(n);
    for (auto& v : a) v = rng.uniform(-5, 5);
    for (auto& v : b) v = rng.uniform(-5, 5);
    const EmpiricalMeasure ma(a), mb(b);
    ASSERT_NEAR(w1_1d(ma, mb), brute_force_wp(a, b, 1), 1e-12);
    ASSERT_NEAR(w2_1d(ma, mb), brute_force_wp(a, b, 2), 1e-12);
  }
}

TEST(Wasserstein, OrderAndTriangle) {
  RandomStream rng(7);
  for (int i = 0; i < 1000; ++i) {
    auto draw = [&] {
      std::vector<double> v(1 + rng.below(40));
      for (auto& x : v) x = rng.normal() * 3 + rng.uniform(-1, 1);
      return EmpiricalMeasure(v);
    };
    const auto a = draw(), b = draw(), c = draw();
    ASSERT_LE(w1_1d(a, b), w2_1d(a, b) * (1 + 1e-12));
    ASSERT_LE(w1_1d(a, b), (w1_1d(a, c) + w1_1d(c, b)) * (1 + 1e-12));
  }
}

TEST(Wasserstein, UnequalSizes) {
  // {0} vs {-1, 1}: all mass at 0 moves distance 1
  EXPECT_DOUBLE_EQ(w1_1d(EmpiricalMeasure({0}), EmpiricalMeasure({-1, 1})), 1.0);
  // {0, 3} vs {1, 1, 2}: quantile coupling, pieces of width 1/3, 1/6, 1/6, 1/3
  EXPECT_NEAR(w1_1d(EmpiricalMeasure({0, 3}), EmpiricalMeasure({1, 1, 2})),
              (1.0 / 3) * 1 + (1.0 / 6) * 1 + (1.0 / 6) * 2 + (1.0 / 3) * 1, 1e-15);
  EXPECT_THROW(EmpiricalMeasure(std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(EmpiricalMeasure({std::nan("")}), std::invalid_argument);
}

TEST(LambdaMax, ExactValue) {
  EXPECT_EQ(exact_binomial(24, 12), "2704156");
  // 1 / (16384 * 0.25 * 2704156^2) to full precision
  EXPECT_EQ(lambda_max(0.5, 1), 3.338693626217402671727e-17);
  EXPECT_EQ(lambda_max(1e-301, 1), kInfinity);
  EXPECT_THROW(lambda_max(0.0, 1), std::invalid_argument);
  EXPECT_THROW(lambda_max(0.5, -1), std::invalid_argument);
}

TEST(LambdaMax, StrictlyDecreasing) {
  for (int r = 0; r < 5; ++r)
    for (int i = 1; i < 10; ++i) {
      const double eta = 0.05 + 0.09 * i;
      EXPECT_LT(lambda_max(eta, r), lambda_max(eta - 0.09, r));
      if (r > 0) EXPECT_LT(lambda_max(eta, r), lambda_max(eta, r - 1));
    }
}

TEST(FiniteDiff, Examples) {
  QuadraticProblem q(1.7, 4);
  const std::vector<double> th{0.3, -2.0, 1.1, 5.0};
  EXPECT_LT(finite_diff_check(q, th, 1e-5, 100, 1).max_relative_error, 1e-9);

  MotivatingProblem m;
  const std::vector<double> half{0.5};
  const auto r = finite_diff_check(m, half, 1e-5, 1, 1);
  EXPECT_LT(r.max_relative_error, 1e-6);
  EXPECT_EQ(r.coordinates_checked, 1u);

  MlpProblem mlp{MlpSpec{}};
  RandomStream rng(3);
  ParamVector w(mlp.dimension());
  for (auto& v : w) v = rng.uniform(-1, 1);
  const Sample s = mlp.draw(rng);
  const auto rm = finite_diff_check(mlp, w, 1e-5, 100, 2, &s);
  EXPECT_LT(rm.max_relative_error, 1e-5);
  EXPECT_EQ(rm.coordinates_checked, std::min<std::size_t>(100, mlp.dimension()));
}

TEST(FiniteDiff, DetectsWrongGradient) {
  struct Broken : Problem {
    std::string name() const override { return "broken"; }
    std::size_t dimension() const override { return 1; }
    Sample draw(RandomStream&) const override { return {}; }
    ParamVector stochastic_gradient(std::span<const double> t, const Sample&) const override {
      return expected_gradient(t);
    }
    double sample_objective(std::span<const double> t, const Sample&) const override {
      return objective(t);
    }
    double objective(std::span<const double> t) const override { return 0.5 * t[0] * t[0]; }
    ParamVector expected_gradient(std::span<const double> t) const override {
      return {1.01 * t[0]};
    }
  } broken;
  const std::vector<double> th{2.0};
  EXPECT_GT(finite_diff_check(broken, th, 1e-5, 1, 1).max_relative_error, 1e-3);
}

TEST(MomentEstimate, Examples) {
  const std::vector<ParamVector> constant(50, ParamVector{3.0, 4.0});
  EXPECT_DOUBLE_EQ(moment_estimate(constant, 2, 0), 25.0);
  EXPECT_DOUBLE_EQ(moment_estimate(constant, 1, 10), 5.0);
  std::vector<ParamVector> two;
  for (int i = 0; i < 100; ++i) two.push_back({i % 2 ? 1.0 : -1.0});
  EXPECT_DOUBLE_EQ(moment_estimate(two, 1, 0), 1.0);
  EXPECT_THROW(moment_estimate(two, 2, 100), std::invalid_argument);
  EXPECT_EQ(default_burn_in(1000), 200u);
}

TEST(MomentEstimate, QuadraticSecondMoment) {
  const auto traj = quadratic_chain(1.0, 1e-3, 1000000, 1);
  EXPECT_NEAR(moment_estimate(traj, 2, default_burn_in(traj.size())), 1.0, 0.05);
}

TEST(ExcessRisk, Examples) {
  MotivatingProblem m;
  EXPECT_EQ(excess_risk_estimate(std::vector<ParamVector>(10, ParamVector{0.0}), m, 0), 0.0);
  EXPECT_DOUBLE_EQ(excess_risk_estimate(std::vector<ParamVector>(10, ParamVector{1.0}), m, 2),
                   11.0 / 4.0);
  QuadraticProblem q(1.0);
  const auto traj = quadratic_chain(10.0, 1e-3, 1000000, 2);
  EXPECT_NEAR(excess_risk_estimate(traj, q, default_burn_in(traj.size())), 0.05, 0.02);
}

TEST(RateSweep, SmallerStepIsCloser) {
  QuadraticProblem q(1.0);
  const auto o = GibbsOracle1D::build(quad, 1.0, -8, 8);
  RateSweepSpec spec;
  spec.hp.inverse_temperature = 1.0;
  spec.hp.boost_floor = 0.1;
  spec.step_sizes = {0.1, 0.025};
  spec.chains = 10000;
  const auto r = rate_sweep(q, o, spec);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].steps, 100);
  EXPECT_EQ(r.rows[1].steps, 400);
  EXPECT_LT(r.rows[1].w1, r.rows[0].w1);
  EXPECT_TRUE(std::isfinite(r.w1_slope));
}

TEST(RateSweep, SingleRow) {
  QuadraticProblem q(1.0);
  const auto o = GibbsOracle1D::build(quad, 1.0, -8, 8);
  RateSweepSpec spec;
  spec.hp.inverse_temperature = 1.0;
  spec.step_sizes = {0.1};
  spec.chains = 200;
  const auto r = rate_sweep(q, o, spec);
  EXPECT_EQ(r.rows.size(), 1u);
  EXPECT_TRUE(std::isnan(r.w1_slope));
  spec.step_sizes.clear();
  EXPECT_THROW(rate_sweep(q, o, spec), std::invalid_argument);
}

TEST(RateSweep, OracleStartStaysWithinNoiseFloor) {
  QuadraticProblem q(1.0);
  const auto o = GibbsOracle1D::build(quad, 1.0, -8, 8);
  RateSweepSpec spec;
  spec.hp.inverse_temperature = 1.0;
  spec.hp.boost_floor = 0.1;
  spec.step_sizes = {1e-4};
  spec.diffusion_time = 0.1;
  spec.chains = 10000;
  spec.init_from_oracle = true;
  const auto r = rate_sweep(q, o, spec);
  EXPECT_LE(r.rows[0].w1, r.noise_floor_w1);
}

TEST(SimulateEndpoints, IndependentOfThreadCount) {
  QuadraticProblem q(1.0);
  ChainSpec spec;
  spec.hp.step_size = 0.01;
  spec.hp.inverse_temperature = 1.0;
  spec.steps = 200;
  spec.chains = 64;
  spec.threads = 1;
  const auto a = simulate_endpoints(q, spec);
  spec.threads = 4;
  EXPECT_EQ(a, simulate_endpoints(q, spec));
}

TEST(MomentTrace, MotivatingShortRun) {
  MotivatingProblem m;
  HyperParams hp;
  hp.step_size = 0.01;
  hp.inverse_temperature = 1.0;
  const auto t = second_moment_trace(m, hp, 20000, 8, 1, {5.0}, 2);
  EXPECT_EQ(t.checkpoints.front(), 1);
  EXPECT_EQ(t.checkpoints.back(), 20000);
  EXPECT_LT(t.sup_running(), 1e3);
  EXPECT_GE(t.max_squared_norm, 25.0 * 0.9);
  EXPECT_GE(t.last_decade_variation(), 0.0);
}

TEST(LogLogSlope, Line) {
  const std::vector<double> x{0.1, 0.01, 0.001}, y{0.3, 0.03, 0.003};
  EXPECT_NEAR(log_log_slope(x, y), 1.0, 1e-12);
  const std::vector<double> y2{std::sqrt(0.1), std::sqrt(0.01), std::sqrt(0.001)};
  EXPECT_NEAR(log_log_slope(x, y2), 0.5, 1e-12);
}

TEST(ParallelFor, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                 if (i == 7) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}
