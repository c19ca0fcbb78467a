#include <gtest/gtest.h>

#include <cmath>

#include "mems/pullin.hpp"

using namespace mems;

namespace {
constexpr double kStatic = 4.0 / 27.0;
constexpr auto kManifold = ThresholdMethod::ManifoldCrossing;
constexpr auto kTrajectory = ThresholdMethod::TrajectoryBisection;
}  // namespace

TEST(AlphaStar, VanishesTowardOneEighth) {
  const double a1 = alpha_star(0.13, kManifold).alpha_star;
  const double a2 = alpha_star(0.126, kManifold).alpha_star;
  const double a3 = alpha_star(0.1251, kManifold).alpha_star;
  const double a4 = alpha_star(0.12501, kManifold).alpha_star;
  EXPECT_GT(a1, a2);
  EXPECT_GT(a2, a3);
  EXPECT_GT(a3, a4);
  EXPECT_GT(a4, 0.0);
  EXPECT_LT(a4, 2e-3);
}

TEST(AlphaStar, GrowsTowardStaticValue) {
  const double lo = alpha_star(0.13, kManifold).alpha_star;
  const double hi = alpha_star(0.147, kManifold).alpha_star;
  EXPECT_GT(hi, 5.0 * lo);
}

TEST(AlphaStar, IncreasingInLambda) {
  double prev = 0.0;
  for (double l : {0.126, 0.13, 0.135, 0.14, 0.145, 0.147}) {
    const double a = alpha_star(l, kManifold).alpha_star;
    EXPECT_GT(a, prev) << l;
    prev = a;
  }
}

TEST(AlphaStar, MethodsAgree) {
  const auto m = alpha_star(0.13, kManifold);
  const auto t = alpha_star(0.13, kTrajectory);
  EXPECT_TRUE(m.resolved);
  EXPECT_TRUE(t.resolved);
  EXPECT_LE(m.half_width, 1e-8);
  EXPECT_LE(t.half_width, 1e-6);
  EXPECT_NEAR(m.alpha_star, t.alpha_star, 1e-5);
  EXPECT_NEAR(m.alpha_star, t.alpha_star, 2.0 * (m.half_width + t.half_width) + 1e-7);
}

TEST(AlphaStar, ManifoldBracketInvariant) {
  for (double l : {0.13, 0.14}) {
    const auto pt = alpha_star(l, kManifold);
    const auto below = crossing_x_bar({l, pt.alpha_star - 2.0 * pt.half_width});
    const auto above = crossing_x_bar({l, pt.alpha_star + 2.0 * pt.half_width});
    ASSERT_TRUE(below);
    EXPECT_LT(*below, 0.0);
    EXPECT_TRUE(!above || *above > 0.0);
  }
}

TEST(AlphaStar, TrajectoryBracketInvariant) {
  const double l = 0.135;
  const auto pt = alpha_star(l, kTrajectory);
  EXPECT_TRUE(is_touchdown(classify({l, pt.alpha_star - 2.0 * pt.half_width})));
  EXPECT_TRUE(is_stable(classify({l, pt.alpha_star + 2.0 * pt.half_width})));
}

TEST(AlphaStar, CustomTolerance) {
  ThresholdOptions o;
  o.tol = 1e-4;
  const auto pt = alpha_star(0.14, kManifold, o);
  EXPECT_LE(pt.half_width, 1e-4);
  EXPECT_GT(pt.half_width, 1e-6);
  EXPECT_NEAR(pt.alpha_star, alpha_star(0.14, kManifold).alpha_star, 1e-4);
}

TEST(AlphaStar, RejectsLambdaOutsideInterval) {
  EXPECT_THROW(alpha_star(0.125, kManifold), std::invalid_argument);
  EXPECT_THROW(alpha_star(0.1, kManifold), std::invalid_argument);
  EXPECT_THROW(alpha_star(kStatic, kManifold), std::invalid_argument);
}

TEST(AlphaStar, CapReportedAsComputationError) {
  ThresholdOptions o;
  o.alpha_cap = 0.5;
  EXPECT_THROW(alpha_star(0.147, kManifold, o), ComputationError);
}

TEST(LambdaDStar, AnchorAtZero) {
  EXPECT_NEAR(lambda_d_star(0.0), 0.125, 1e-10);
  EXPECT_NEAR(lambda_d_star(0.0, 0.0, kManifold), 0.125, 1e-10);
}

TEST(LambdaDStar, InsideOpenInterval) {
  for (double a : {0.01, 0.05, 0.1, 0.3, 0.5}) {
    const double l = lambda_d_star(a);
    EXPECT_GT(l - 0.125, 1e-8) << a;
    EXPECT_GT(kStatic - l, 1e-8) << a;
    EXPECT_GT(l, 1.0 / 32.0);
  }
}

TEST(LambdaDStar, InverseOfAlphaStar) {
  // Round trip at a damping where the threshold is well below the static value.
  const double a = 0.5;
  ThresholdOptions o;
  o.tol = 1e-10;
  const double l = lambda_d_star_point(a, kManifold, o).lambda_d;
  EXPECT_NEAR(alpha_star(l, kManifold).alpha_star, a, 1e-4);
}

TEST(LambdaDStar, MethodsAgree) {
  for (double a : {0.1, 0.3}) {
    const double m = lambda_d_star(a, 0.0, kManifold);
    const double t = lambda_d_star(a, 0.0, kTrajectory);
    EXPECT_NEAR(m, t, 2.0 * (1e-8 + 1e-6)) << a;
  }
}

TEST(LambdaDStar, SaturatesForStrongDamping) {
  const auto r = lambda_d_star_point(2.0, kManifold);
  EXPECT_TRUE(r.saturated);
  EXPECT_LT(kStatic - r.lambda_d, 1e-8);
}

TEST(LambdaDStar, RejectsNegativeDamping) {
  EXPECT_THROW(lambda_d_star(-0.1), std::invalid_argument);
}

TEST(SweepCurve, ZeroOnly) {
  const auto c = sweep_curve({0.0}, kTrajectory);
  ASSERT_EQ(c.points.size(), 1u);
  EXPECT_EQ(c.points[0].alpha, 0.0);
  EXPECT_NEAR(c.points[0].lambda_d, 0.125, 1e-10);
  EXPECT_TRUE(c.violations.empty());
  EXPECT_EQ(c.tol, 1e-6);
}

TEST(SweepCurve, IncreasingOnModerateDamping) {
  const auto c = sweep_curve({0.0, 0.1, 0.2, 0.3, 0.5, 0.7}, kManifold);
  ASSERT_EQ(c.points.size(), 6u);
  EXPECT_TRUE(c.failures.empty());
  EXPECT_TRUE(c.violations.empty()) << c.violations.front();
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    EXPECT_GT(c.points[i].lambda_d, c.points[i - 1].lambda_d);
  }
}

TEST(SweepCurve, SaturationFlaggedAsViolation) {
  const auto c = sweep_curve({0.5, 2.0}, kManifold);
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_FALSE(c.points[0].saturated);
  EXPECT_TRUE(c.points[1].saturated);
  EXPECT_FALSE(c.violations.empty());
}

TEST(SweepCurve, DeterministicAcrossWorkerCounts) {
  const std::vector<double> grid{0.0, 0.05, 0.1, 0.2};
  const auto a = sweep_curve(grid, kManifold, {}, 1);
  const auto b = sweep_curve(grid, kManifold, {}, 3);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].alpha, b.points[i].alpha);
    EXPECT_EQ(a.points[i].lambda_d, b.points[i].lambda_d);
  }
}

TEST(SweepCurve, GridValidation) {
  EXPECT_THROW(sweep_curve({}, kManifold), std::invalid_argument);
  EXPECT_THROW(sweep_curve({0.5, 0.1}, kManifold), std::invalid_argument);
  EXPECT_THROW(sweep_curve({-0.1}, kManifold), std::invalid_argument);
}

TEST(SweepCurve, ViolationChecks) {
  std::vector<LambdaThreshold> pts(2);
  pts[0].alpha = 0.0;
  pts[0].lambda_d = 0.13;
  pts[1].alpha = 1.0;
  pts[1].lambda_d = 0.12;
  EXPECT_EQ(curve_violations(pts).size(), 3u);
}

TEST(ParallelMap, CapturesExceptionsPerTask) {
  auto r = parallel_map<int>(5, 2, [](std::size_t i) {
    if (i == 3) throw std::runtime_error("boom");
    return static_cast<int>(i * i);
  });
  ASSERT_EQ(r.size(), 5u);
  EXPECT_EQ(*r[2].value, 4);
  EXPECT_FALSE(r[3].value);
  EXPECT_EQ(r[3].error, "boom");
}

TEST(Residence, DwellDominatesNearThreshold) {
  const double a = 0.1;
  ThresholdOptions o;
  o.tol = 1e-10;
  const double ld = lambda_d_star_point(a, kManifold, o).lambda_d;
  double prev = 0.0;
  ResidenceProfile last;
  for (double d : {1e-2, 1e-3, 1e-4}) {
    last = residence_profile({ld + d, a}, 0.15);
    EXPECT_GT(last.t_dwell, prev) << d;
    prev = last.t_dwell;
  }
  EXPECT_GT(last.t_dwell, last.t_approach + last.t_collapse);
}
