#include <gtest/gtest.h>

#include <random>

#include "mems/model.hpp"

using namespace mems;

namespace {
constexpr double kStatic = 4.0 / 27.0;
}

TEST(Force, VanishesAtDegeneratePoint) { EXPECT_NEAR(force(-1.0 / 3.0, kStatic), 0.0, 1e-15); }

TEST(Force, AtOriginEqualsLambda) {
  for (double l : {0.01, 0.1, 0.125, 0.2}) EXPECT_DOUBLE_EQ(force(0.0, l), l);
}

TEST(Force, VanishesAtHalfForOneEighth) { EXPECT_NEAR(force(-0.5, 0.125), 0.0, 1e-16); }

TEST(Force, RejectsPole) {
  EXPECT_THROW(force(-1.0, 0.1), DomainError);
  EXPECT_THROW(force(-1.5, 0.1), DomainError);
  EXPECT_THROW(potential(-1.0, 0.1), DomainError);
  EXPECT_THROW(energy({0.0, -1.0, 0.0}, 0.1), DomainError);
}

TEST(CubicG, Landmarks) {
  EXPECT_NEAR(cubic_g(-1.0 / 3.0), -4.0 / 27.0, 1e-16);
  EXPECT_EQ(cubic_g(0.0), 0.0);
  EXPECT_DOUBLE_EQ(cubic_g(-0.5), -0.125);
}

TEST(CubicG, StationaryPointsSolveGEqualsMinusLambda) {
  // f(x) = 0 <=> g(x) = -lambda for x > -1.
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ux(-0.99, 2.0);
  for (int i = 0; i < 200; ++i) {
    const double x = ux(rng);
    const double l = -cubic_g(x);
    if (l <= 0.0) continue;
    EXPECT_NEAR(force(x, l), 0.0, 1e-12 * (1.0 + l / ((1 + x) * (1 + x))));
  }
}

TEST(Potential, Landmarks) {
  EXPECT_DOUBLE_EQ(potential(0.0, 0.1), -0.1);
  EXPECT_DOUBLE_EQ(potential(-0.5, 0.125), -0.125);
  EXPECT_NEAR(potential(-1.0 / 3.0, kStatic), -1.0 / 6.0, 1e-15);
}

TEST(Potential, DerivativeIsForce) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ux(-0.9, 1.0), ul(0.01, 0.2);
  for (int i = 0; i < 100; ++i) {
    const double x = ux(rng), l = ul(rng), h = 1e-6;
    const double fd = (potential(x + h, l) - potential(x - h, l)) / (2 * h);
    EXPECT_NEAR(fd, force(x, l), 1e-6 * (1 + std::abs(force(x, l))));
  }
}

TEST(Energy, OriginAndZeroVelocity) {
  EXPECT_DOUBLE_EQ(energy({3.0, 0.0, 0.0}, 0.07), -0.07);
  for (double x : {-0.7, -0.2, 0.4}) EXPECT_DOUBLE_EQ(energy({0.0, x, 0.0}, 0.1), potential(x, 0.1));
}

TEST(Energy, RateAlongFieldIsMinusAlphaYSquared) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> ux(-0.8, 0.5), uy(-1.0, 1.0), ua(0.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const PhaseState s{0.0, ux(rng), uy(rng)};
    const Params p{0.1, ua(rng)};
    const auto v = vector_field(s, p);
    const double rate = force(s.x, p.lambda) * v[0] + s.y * v[1];
    EXPECT_NEAR(rate, -p.alpha * s.y * s.y, 1e-13);
  }
}

TEST(DforceDx, Landmarks) {
  EXPECT_NEAR(dforce_dx(-1.0 / 3.0, kStatic), 0.0, 1e-15);
  for (double l : {0.05, 0.1}) EXPECT_DOUBLE_EQ(dforce_dx(0.0, l), 1.0 - 2.0 * l);
}

TEST(DforceDx, MatchesFiniteDifference) {
  for (double x : {-0.8, -0.5, -0.1, 0.3}) {
    const double h = 1e-6;
    const double fd = (force(x + h, 0.12) - force(x - h, 0.12)) / (2 * h);
    EXPECT_NEAR(dforce_dx(x, 0.12), fd, 1e-6);
  }
}

TEST(DforceDlambda, MatchesFiniteDifference) {
  for (double x : {-0.8, -0.5, 0.0, 0.3}) {
    const double h = 1e-6;
    const double fd = (force(x, 0.1 + h) - force(x, 0.1 - h)) / (2 * h);
    EXPECT_NEAR(dforce_dlambda(x), fd, 1e-6 * dforce_dlambda(x));
    EXPECT_GT(dforce_dlambda(x), 0.0);
  }
}

TEST(VectorField, Examples) {
  const auto a = vector_field({0.0, 0.0, 0.0}, {0.11, 0.7});
  EXPECT_EQ(a[0], 0.0);
  EXPECT_DOUBLE_EQ(a[1], -0.11);
  const auto b = vector_field({0.0, -0.5, 1.0}, {0.125, 2.0});
  EXPECT_DOUBLE_EQ(b[0], 1.0);
  EXPECT_NEAR(b[1], -2.0, 1e-15);
}

TEST(Params, Validation) {
  EXPECT_THROW(validate({0.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(validate({0.1, -1.0}), std::invalid_argument);
  EXPECT_THROW(validate({NAN, 1.0}), std::invalid_argument);
  EXPECT_NO_THROW(validate({0.1, 0.0}));
}
