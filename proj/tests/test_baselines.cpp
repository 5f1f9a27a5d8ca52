#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "theo/baselines.hpp"
#include "theo/optimizer.hpp"
#include "theo/random.hpp"

using namespace theo;

namespace {
using V = std::vector<double>;
}

TEST(Sgd, PlainStep) {
  MomentumState s;
  EXPECT_DOUBLE_EQ(sgd_step(V{1.0}, V{2.0}, 0.1, s)[0], 0.8);
}

TEST(Sgd, ZeroGradient) {
  MomentumState s;
  EXPECT_EQ(sgd_step(V{1.0}, V{0.0}, 0.1, s)[0], 1.0);
}

TEST(Sgd, MomentumCompounds) {
  MomentumState s;
  s.momentum = 0.9;
  V th{0.0};
  th = sgd_step(th, V{1.0}, 0.1, s);
  EXPECT_DOUBLE_EQ(th[0], -0.1);
  th = sgd_step(th, V{1.0}, 0.1, s);
  EXPECT_NEAR(th[0], -0.29, 1e-15);
}

TEST(Adam, FirstStep) {
  AdamState s;
  const auto th = adam_step(V{1.0}, V{1.0}, 0.001, s);
  EXPECT_NEAR(th[0], 1.0 - 0.001 / (1.0 + 1e-8), 1e-15);
  EXPECT_EQ(s.step_count, 1u);
  EXPECT_NEAR(s.first_moment[0], 0.1, 1e-15);
  EXPECT_NEAR(s.second_moment[0], 0.001, 1e-15);
}

TEST(Adam, Defaults) {
  AdamState s;
  EXPECT_EQ(s.beta1, 0.9);
  EXPECT_EQ(s.beta2, 0.999);
  EXPECT_EQ(s.eps, 1e-8);
  EXPECT_TRUE(s.bias_correction);
}

TEST(Adam, UncorrectedFirstStep) {
  AdamState s;
  s.bias_correction = false;
  // m = 0.1, v = 0.001: theta - lr * 0.1 / (sqrt(0.001) + eps)
  const auto th = adam_step(V{1.0}, V{1.0}, 0.001, s);
  EXPECT_NEAR(th[0], 1.0 - 0.001 * 0.1 / (std::sqrt(0.001) + 1e-8), 1e-15);
}

TEST(Adam, ZeroGradientFixedPoint) {
  AdamState s;
  V th{0.7, -2.0};
  for (int i = 0; i < 1000; ++i) th = adam_step(th, V{0.0, 0.0}, 0.001, s);
  EXPECT_EQ(th, (V{0.7, -2.0}));
}

TEST(AmsGrad, MaxRetained) {
  AmsGradState s;
  s.adam.beta2 = 0.5;  // with beta2 >= 0.75 the second moment would still grow
  V th{1.0};
  th = amsgrad_step(th, V{2.0}, 0.01, s);
  const double after_first = s.max_second_moment[0];
  EXPECT_DOUBLE_EQ(after_first, 2.0);
  th = amsgrad_step(th, V{1.0}, 0.01, s);
  EXPECT_DOUBLE_EQ(s.adam.second_moment[0], 1.5);
  EXPECT_EQ(s.max_second_moment[0], after_first);
}

TEST(AmsGrad, MatchesAdamWhileNondecreasing) {
  AdamState a;
  AmsGradState m;
  V ta{1.0}, tm{1.0};
  // increasing gradients keep v_n nondecreasing
  for (int i = 1; i <= 50; ++i) {
    const V g{static_cast<double>(i)};
    ta = adam_step(ta, g, 0.01, a);
    tm = amsgrad_step(tm, g, 0.01, m);
    ASSERT_EQ(ta, tm) << "step " << i;
  }
}

TEST(AmsGrad, ZeroGradientFixedPoint) {
  AmsGradState s;
  V th{3.0};
  for (int i = 0; i < 100; ++i) th = amsgrad_step(th, V{0.0}, 0.01, s);
  EXPECT_EQ(th[0], 3.0);
}

TEST(AmsGrad, MonotoneMaximum) {
  AmsGradState s;
  RandomStream rng(3);
  V th{0.0, 0.0, 0.0};
  V prev(3, 0.0);
  for (int i = 0; i < 10000; ++i) {
    V g(3);
    for (double& v : g) v = rng.normal() * std::exp(rng.uniform(-3, 3));
    th = amsgrad_step(th, g, 0.001, s);
    for (int j = 0; j < 3; ++j) {
      ASSERT_GE(s.max_second_moment[j], prev[j]);
      ASSERT_GE(s.max_second_moment[j], s.adam.second_moment[j]);
    }
    prev = s.max_second_moment;
  }
}

TEST(RmsProp, ZeroGradient) {
  RmsPropState s;
  EXPECT_EQ(rmsprop_step(V{1.0}, V{0.0}, 0.01, s)[0], 1.0);
}

TEST(RmsProp, FirstStep) {
  RmsPropState s;
  s.alpha = 0.99;
  const auto th = rmsprop_step(V{1.0}, V{1.0}, 0.01, s);
  EXPECT_NEAR(s.second_moment[0], 0.01, 1e-17);
  EXPECT_NEAR(th[0], 1.0 - 0.01 / (0.1 + 1e-8), 1e-15);
  EXPECT_NEAR(th[0], 0.9, 1e-6);
}

TEST(RmsProp, ConstantGradientLimit) {
  RmsPropState s;
  for (double c : {-3.0, 0.5}) {
    s = {};
    V th{0.0};
    double last = 0;
    for (int i = 0; i < 5000; ++i) {
      const double before = th[0];
      th = rmsprop_step(th, V{c}, 0.01, s);
      last = before - th[0];
    }
    EXPECT_NEAR(last, 0.01 * std::copysign(1.0, c), 1e-8);
  }
}

TEST(ScaleInvariance, ConstantGradient) {
  for (double c : {1e-3, 0.5, 7.0, 1e4}) {
    AdamState a1, a2;
    a1.eps = a2.eps = 0;
    AmsGradState m1, m2;
    m1.adam.eps = m2.adam.eps = 0;
    RmsPropState r1, r2;
    r1.eps = r2.eps = 0;
    V x1{0.3}, x2{0.3}, y1{0.3}, y2{0.3}, z1{0.3}, z2{0.3};
    for (int i = 0; i < 100; ++i) {
      x1 = adam_step(x1, V{1.5}, 0.01, a1);
      x2 = adam_step(x2, V{1.5 * c}, 0.01, a2);
      y1 = amsgrad_step(y1, V{1.5}, 0.01, m1);
      y2 = amsgrad_step(y2, V{1.5 * c}, 0.01, m2);
      z1 = rmsprop_step(z1, V{1.5}, 0.01, r1);
      z2 = rmsprop_step(z2, V{1.5 * c}, 0.01, r2);
    }
    EXPECT_NEAR(x1[0], x2[0], 1e-14);
    EXPECT_NEAR(y1[0], y2[0], 1e-14);
    EXPECT_NEAR(z1[0], z2[0], 1e-14);
  }
}

TEST(ZeroSmoothing, ReducesToNormalizedGradientStep) {
  // With every smoothing coefficient 0 the moment estimates are g and g^2,
  // so each adaptive method takes the plain step on g / |g|.
  for (double g : {-4.0, 0.25, 3.0}) {
    MomentumState sgd;
    const double plain = sgd_step(V{1.0}, V{g / std::abs(g)}, 0.01, sgd)[0];
    AdamState a;
    a.beta1 = a.beta2 = 0;
    AmsGradState m;
    m.adam.beta1 = m.adam.beta2 = 0;
    RmsPropState r;
    r.alpha = 0;
    V ta{1.0}, tm{1.0}, tr{1.0};
    for (int i = 0; i < 3; ++i) {
      const double start = ta[0];
      ta = adam_step(ta, V{g}, 0.01, a);
      tm = amsgrad_step(tm, V{g}, 0.01, m);
      tr = rmsprop_step(tr, V{g}, 0.01, r);
      EXPECT_NEAR(ta[0] - start, plain - 1.0, 1e-9);
      EXPECT_NEAR(tm[0] - start, plain - 1.0, 1e-9);
      EXPECT_NEAR(tr[0] - start, plain - 1.0, 1e-9);
    }
  }
}

TEST(Optimizers, WrappersMatchStepFunctions) {
  AdamState a;
  AdamOptimizer opt(0.01, AdamState{});
  V direct{1.0, -1.0}, wrapped{1.0, -1.0};
  for (int i = 0; i < 10; ++i) {
    const V g{0.1 * i, -0.2};
    direct = adam_step(direct, g, 0.01, a);
    opt.step(wrapped, g);
  }
  EXPECT_EQ(direct, wrapped);
  EXPECT_EQ(opt.name(), "adam");
  EXPECT_EQ(opt.learning_rate(), 0.01);
}

TEST(Optimizers, DimensionMismatchRejected) {
  AdamState s;
  (void)adam_step(V{1.0}, V{1.0}, 0.01, s);
  EXPECT_THROW((void)adam_step(V{1.0, 2.0}, V{1.0, 2.0}, 0.01, s), std::invalid_argument);
  MomentumState m;
  EXPECT_THROW((void)sgd_step(V{1.0}, V{1.0, 2.0}, 0.01, m), std::invalid_argument);
}
