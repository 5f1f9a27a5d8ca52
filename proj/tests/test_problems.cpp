#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "theo/diagnostics.hpp"
#include "theo/problems.hpp"

using namespace theo;

TEST(MotivatingGradient, Examples) {
  for (double x : {-2.0, 0.0, 1.5}) EXPECT_EQ(motivating_gradient(0.0, x), 0.0);
  // 4 + 30 * 186264514923095703125
  EXPECT_DOUBLE_EQ(motivating_gradient(5.0, 0.0), 5587935447692871093754.0);
  EXPECT_NEAR(motivating_gradient(0.5, 2.0), 1.0000000558793544769287109375, 1e-15);
}

TEST(MotivatingGradient, Branches) {
  // |theta| <= 1: 2 theta (1 + 1{x <= 1}) + 30 theta^29
  EXPECT_DOUBLE_EQ(motivating_gradient(0.5, 0.0), 2.0 + 30 * std::pow(0.5, 29));
  // indicator boundary is inclusive
  EXPECT_DOUBLE_EQ(motivating_gradient(0.5, 1.0), 2.0 + 30 * std::pow(0.5, 29));
  // |theta| > 1 uses the sign
  EXPECT_DOUBLE_EQ(motivating_gradient(-2.0, 1.5), -2.0 - 30 * std::pow(2.0, 29));
}

TEST(MotivatingObjective, Examples) {
  EXPECT_EQ(motivating_objective(0.0), 0.0);
  EXPECT_DOUBLE_EQ(motivating_objective(1.0), 11.0 / 4.0);
  EXPECT_DOUBLE_EQ(motivating_objective(2.0), 1073741829.25);
  EXPECT_DOUBLE_EQ(motivating_objective(-2.0), 1073741829.25);
}

TEST(MotivatingTrueGradient, Examples) {
  EXPECT_DOUBLE_EQ(motivating_true_gradient(1.0), 67.0 / 2.0);
  EXPECT_EQ(motivating_true_gradient(0.0), 0.0);
  EXPECT_DOUBLE_EQ(motivating_true_gradient(-1.0), -67.0 / 2.0);
}

TEST(MotivatingProblem, UnbiasedByExactQuadrature) {
  // X ~ U[-2, 2): the indicator 1{x <= 1} has probability 3/4, so averaging
  // the four quarter-midpoints is exact
  const double xs[] = {-1.5, -0.5, 0.5, 1.5};
  for (double th : {-3.0, -1.0, -0.4, 0.0, 0.3, 0.99, 1.0, 1.7, 2.5}) {
    double avg = 0;
    for (double x : xs) avg += motivating_gradient(th, x) / 4.0;
    EXPECT_NEAR(avg, motivating_true_gradient(th), 1e-12 * (1 + std::abs(avg))) << th;
  }
}

TEST(MotivatingProblem, ContinuityAtUnitNorm) {
  for (double s : {-1.0, 1.0}) {
    const double in = std::nextafter(s, 0.0);
    const double out = std::nextafter(s, 2 * s);
    EXPECT_NEAR(motivating_objective(in), motivating_objective(out), 1e-13);
    EXPECT_NEAR(motivating_true_gradient(in), motivating_true_gradient(out), 1e-12);
  }
}

TEST(MotivatingProblem, LipschitzBound) {
  RandomStream rng(21);
  for (int i = 0; i < 100000; ++i) {
    const double a = rng.uniform(-3, 3), b = rng.uniform(-3, 3), x = rng.uniform(-2, 2);
    const double lhs = std::abs(motivating_gradient(a, x) - motivating_gradient(b, x));
    const double rhs = 34 * std::pow(1 + std::abs(a) + std::abs(b), 28) * std::abs(a - b);
    ASSERT_LE(lhs, rhs) << a << " " << b << " " << x;
  }
}

TEST(MotivatingProblem, SamplingRangeAndOptimum) {
  MotivatingProblem p;
  RandomStream rng(1);
  for (int i = 0; i < 10000; ++i) {
    const auto s = p.draw(rng);
    ASSERT_GE(s.x[0], -2.0);
    ASSERT_LT(s.x[0], 2.0);
  }
  ASSERT_TRUE(p.optimum().has_value());
  EXPECT_EQ(p.optimum()->point, ParamVector{0.0});
  EXPECT_EQ(p.optimum()->value, 0.0);
  EXPECT_EQ(p.growth_exponent(), 29);
}

TEST(QuadraticProblem, Gradient) {
  QuadraticProblem q(1.0);
  const std::vector<double> th{3.0};
  EXPECT_EQ(q.expected_gradient(th)[0], 3.0);
  RandomStream rng(1);
  EXPECT_EQ(q.stochastic_gradient(th, q.draw(rng))[0], 3.0);
  QuadraticProblem q2(2.0, 3);
  const std::vector<double> t3{1.0, -2.0, 0.5};
  EXPECT_EQ(q2.expected_gradient(t3), (ParamVector{2.0, -4.0, 1.0}));
  EXPECT_DOUBLE_EQ(q2.objective(t3), 5.25);
}

TEST(QuadraticProblem, GibbsVariance) {
  for (auto [a, beta, var] : {std::tuple{1.0, 1.0, 1.0}, {1.0, 4.0, 0.25}, {2.0, 1.0, 0.5}}) {
    QuadraticProblem q(a);
    const auto o = GibbsOracle1D::build(
        [&q](double z) { return q.objective(std::span<const double>(&z, 1)); }, beta, -8, 8);
    EXPECT_NEAR(o.mean(), 0.0, 1e-10);
    EXPECT_NEAR(o.variance(), var, 1e-4);
  }
}

TEST(Mlp, ZeroNetworkLinear) {
  // zero weights, zero targets, linear activation: loss and gradient vanish
  MlpProblem p({2, 3, 1}, Activation::kLinear, {0.5, -1.0, 2.0, 0.1}, {0.0, 0.0}, 2);
  const ParamVector th(p.dimension(), 0.0);
  const auto g = p.stochastic_gradient(th, p.full_batch());
  for (double v : g) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(p.objective(th), 0.0);
}

TEST(Mlp, HandTracedGradient) {
  // 1-2-1, tanh hidden, datum x = 0.5, y = 1, loss 0.5 r^2.
  // h = tanh(W1 x + b1) = tanh([0.25, -0.05]); f = W2 h + b2; r = f - 1.
  // dL/db2 = r; dL/dW2 = r h; dL/db1 = r W2 (1 - h^2); dL/dW1 = x dL/db1.
  // Evaluated to 20 digits by hand-written arbitrary-precision arithmetic.
  MlpProblem p({1, 2, 1}, Activation::kTanh, {0.5}, {1.0}, 1);
  ASSERT_EQ(p.dimension(), 7u);
  const ParamVector th{0.3, -0.2, 0.1, 0.05, 0.7, -0.4, 0.2};
  const std::vector<std::size_t> idx{0};
  ParamVector g;
  const double loss = p.loss_and_gradient(th, idx, &g);
  EXPECT_NEAR(loss, 0.18518090499186640545, 1e-15);
  const double want[] = {-0.2002238727109413587,  0.12141093690081819372,
                         -0.4004477454218827174,  0.24282187380163638744,
                         -0.14905102873921310434, 0.030403347415548281432,
                         -0.60857358633425162063};
  ASSERT_EQ(g.size(), 7u);
  for (int i = 0; i < 7; ++i) EXPECT_NEAR(g[i], want[i], 1e-15) << i;
}

TEST(Mlp, FiniteDifferenceOnBuiltins) {
  RandomStream rng(8);
  for (const auto& prob : builtin_problems()) {
    for (int k = 0; k < 5; ++k) {
      ParamVector th(prob->dimension());
      for (double& v : th) v = rng.uniform(-prob->probe_radius(), prob->probe_radius());
      RandomStream data(rng.next_u64());
      const Sample s = prob->draw(data);
      const auto r = finite_diff_check(*prob, th, 1e-5, 100, rng.next_u64(), &s);
      EXPECT_LT(r.max_relative_error, 1e-5) << prob->name();
    }
  }
}

TEST(Mlp, DeterministicTeacher) {
  MlpSpec spec;
  MlpProblem a(spec), b(spec);
  EXPECT_EQ(a.teacher(), b.teacher());
  EXPECT_EQ(a.dimension(), MlpProblem::parameter_count(spec.layers));
  EXPECT_EQ(a.dimension(), 4u * 16 + 16 + 16 + 1);
  EXPECT_GT(a.teacher_loss(), 0.0);  // label noise
  spec.seed = 8;
  EXPECT_NE(MlpProblem(spec).teacher(), a.teacher());
}

TEST(Mlp, Validation) {
  MlpSpec spec;
  spec.layers = {4};
  EXPECT_THROW(MlpProblem{spec}, std::invalid_argument);
  spec.layers = {1000, 1000, 1};
  EXPECT_THROW(MlpProblem{spec}, std::invalid_argument);
  EXPECT_THROW(parse_activation("sigmoid"), std::invalid_argument);
  EXPECT_EQ(parse_activation("relu"), Activation::kRelu);
  EXPECT_EQ(to_string(Activation::kTanh), "tanh");
}

TEST(Builtins, Names) {
  const auto all = builtin_problems();
  ASSERT_GE(all.size(), 3u);
  EXPECT_EQ(all.front()->name(), "motivating");
}
