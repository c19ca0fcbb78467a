#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mems/dynamics.hpp"
#include "mems/steady.hpp"

using namespace mems;

namespace {
constexpr double kStatic = 4.0 / 27.0;
}

TEST(StaticPullin, Value) { EXPECT_DOUBLE_EQ(static_pullin(), 4.0 / 27.0); }

TEST(Equilibria, KindAroundThreshold) {
  EXPECT_EQ(equilibria(kStatic - 1e-6).kind, EquilibriumKind::Pair);
  EXPECT_EQ(equilibria(kStatic + 1e-6).kind, EquilibriumKind::None);
  EXPECT_EQ(equilibria(0.2).kind, EquilibriumKind::None);
  EXPECT_TRUE(std::isnan(equilibria(0.2).x1));
}

TEST(Equilibria, OneEighthClosedForm) {
  const auto eq = equilibria(0.125);
  ASSERT_EQ(eq.kind, EquilibriumKind::Pair);
  EXPECT_NEAR(eq.x1, -0.5, 1e-14);
  EXPECT_NEAR(eq.x2, (-3.0 + std::sqrt(5.0)) / 4.0, 1e-14);
}

TEST(Equilibria, DegenerateAtThreshold) {
  const auto eq = equilibria(kStatic);
  EXPECT_EQ(eq.kind, EquilibriumKind::Degenerate);
  EXPECT_DOUBLE_EQ(eq.x1, -1.0 / 3.0);
  EXPECT_DOUBLE_EQ(eq.x2, -1.0 / 3.0);
}

TEST(Equilibria, ResidualsAndOrdering) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ul(1e-6, kStatic - 1e-9);
  for (int i = 0; i < 500; ++i) {
    const double l = ul(rng);
    const auto eq = equilibria(l);
    ASSERT_EQ(eq.kind, EquilibriumKind::Pair);
    EXPECT_LE(std::abs(cubic_g(eq.x1) + l), 1e-14);
    EXPECT_LE(std::abs(cubic_g(eq.x2) + l), 1e-14);
    EXPECT_LT(-1.0, eq.x1);
    EXPECT_LE(eq.x1, -1.0 / 3.0);
    EXPECT_LE(-1.0 / 3.0, eq.x2);
    EXPECT_LT(eq.x2, 0.0);
  }
}

TEST(Equilibria, NonpositiveLambdaRejected) {
  EXPECT_THROW(equilibria(0.0), std::invalid_argument);
  EXPECT_THROW(equilibria(-0.1), std::invalid_argument);
}

TEST(Stability, DegenerateEigenvalues) {
  for (double a : {0.0, 0.5, 2.0}) {
    const auto r = stability(-1.0 / 3.0, {kStatic, a});
    EXPECT_EQ(r.label, StabilityLabel::DegenerateCenterDirection);
    EXPECT_EQ(r.mu_plus, std::complex<double>(0.0));
    EXPECT_DOUBLE_EQ(r.mu_minus.real(), -a);
  }
}

TEST(Stability, DegenerateWithinReportedBand) {
  // Any load that equilibria() calls degenerate gets the degenerate label.
  for (double l : {0.148148148148, kStatic - 9e-13, kStatic + 9e-13}) {
    const auto eq = equilibria(l);
    ASSERT_EQ(eq.kind, EquilibriumKind::Degenerate) << l;
    EXPECT_EQ(stability(eq.x1, {l, 0.0}).label, StabilityLabel::DegenerateCenterDirection);
  }
}

TEST(Stability, LowerPointIsAlwaysSaddle) {
  for (double l : {0.001, 0.05, 0.125, 0.14, kStatic - 1e-6}) {
    for (double a : {0.0, 0.1, 1.0, 10.0}) {
      const auto eq = equilibria(l);
      const auto r = stability(eq.x1, {l, a});
      EXPECT_EQ(r.label, StabilityLabel::Saddle) << l << " " << a;
      EXPECT_GT(r.mu_plus.real(), 0.0);
      EXPECT_LT(r.mu_minus.real(), 0.0);
      EXPECT_LT(dforce_dx(eq.x1, l), 0.0);
      EXPECT_GT(dforce_dx(eq.x2, l), 0.0);
    }
  }
}

TEST(Stability, UpperPointCenterWithoutDamping) {
  const auto eq = equilibria(0.1);
  const auto r = stability(eq.x2, {0.1, 0.0});
  EXPECT_EQ(r.label, StabilityLabel::Center);
  EXPECT_EQ(r.mu_plus.real(), 0.0);
  EXPECT_GT(r.mu_plus.imag(), 0.0);
  EXPECT_DOUBLE_EQ(r.mu_plus.imag(), -r.mu_minus.imag());
}

TEST(Stability, UpperPointFocusThenNode) {
  const double l = 0.1;
  const double ah = heteroclinic_threshold(l);
  EXPECT_EQ(stability(equilibria(l).x2, {l, 0.5 * ah}).label, StabilityLabel::StableFocus);
  EXPECT_EQ(stability(equilibria(l).x2, {l, 1.5 * ah}).label, StabilityLabel::StableNode);
}

TEST(Stability, EigenvaluesSolveCharacteristicPolynomial) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> ul(0.001, 0.148), ua(0.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    const Params p{ul(rng), ua(rng)};
    const auto eq = equilibria(p.lambda);
    for (double x : {eq.x1, eq.x2}) {
      const auto r = stability(x, p);
      for (auto mu : {r.mu_plus, r.mu_minus}) {
        const auto c = mu * mu + p.alpha * mu + r.stiffness;
        EXPECT_LT(std::abs(c), 1e-12 * (1 + p.alpha * p.alpha + std::abs(r.stiffness)));
      }
    }
  }
}

TEST(Stability, RejectsNonEquilibrium) {
  EXPECT_THROW(stability(0.0, {0.1, 1.0}), std::invalid_argument);
}

TEST(FisherSlope, EqualsStiffnessAtStablePoint) {
  for (double l : {0.05, 0.1, 0.13}) {
    EXPECT_DOUBLE_EQ(fisher_slope(l), dforce_dx(equilibria(l).x2, l));
  }
}

TEST(FisherSlope, VanishesAtDegeneracy) {
  EXPECT_LT(fisher_slope(kStatic - 1e-10), 1e-4);
  EXPECT_LT(fisher_slope(kStatic - 1e-10), fisher_slope(kStatic - 1e-6));
}

TEST(FisherSlope, IsSupremumOfSecantSlopes) {
  // Secant slopes through (x2, 0) over the saddle-to-node interval; f is
  // convex, so the supremum is the tangent slope at x2.
  for (double l : {0.05, 0.1, 0.13}) {
    const auto eq = equilibria(l);
    double sup = -INFINITY;
    // Logarithmic grid in the distance to x2, from the saddle down to 1e-8.
    const int n = 20000;
    const double w = eq.x2 - eq.x1;
    for (int i = 0; i < n; ++i) {
      const double x = eq.x2 - 1e-8 * std::pow(w / 1e-8, static_cast<double>(i) / n);
      sup = std::max(sup, force(x, l) / (x - eq.x2));
    }
    EXPECT_NEAR(sup, fisher_slope(l), 1e-6) << l;
  }
}

TEST(HeteroclinicThreshold, Formula) {
  for (double l : {0.05, 0.1, 0.13}) {
    const double x2 = equilibria(l).x2;
    EXPECT_NEAR(heteroclinic_threshold(l),
                2.0 * std::sqrt(1.0 - 2.0 * l / std::pow(1.0 + x2, 3)), 1e-14);
  }
  double prev = INFINITY;
  for (double eps : {1e-4, 1e-6, 1e-8, 1e-10}) {
    const double h = heteroclinic_threshold(kStatic - eps);
    EXPECT_LT(h, prev);
    prev = h;
  }
  EXPECT_LT(prev, 2e-2);
}

TEST(HeteroclinicThreshold, UnstableBranchReachesStablePointAboveIt) {
  const double l = 0.13;
  const Params p{l, heteroclinic_threshold(l) + 0.5};
  const auto eq = equilibria(l);
  const auto r = stability(eq.x1, p);
  const double mu = r.mu_plus.real();
  const double eps = 1e-6;
  const double n = std::hypot(1.0, mu);
  IntegrationOptions o;
  o.t_max = 200.0;
  const auto out = classify(p, o, {0.0, eq.x1 + eps / n, eps * mu / n});
  ASSERT_TRUE(is_stable(out)) << outcome_name(out);
  EXPECT_DOUBLE_EQ(std::get<ConvergedStable>(out).x2, eq.x2);
}
