#include <gtest/gtest.h>

#include <cmath>

#include "mems/ode.hpp"
#include "mems/roots.hpp"

using namespace mems;
using namespace mems::ode;

namespace {

auto oscillator = [](double, const State<2>& s, State<2>& ds) {
  ds = {s[1], -s[0]};
  return true;
};

template <class Stepper>
void advance_to(Stepper& st, double t_end) {
  while (st.t() < t_end) ASSERT_EQ(st.step(t_end - st.t()), StepStatus::Accepted);
}

}  // namespace

TEST(DormandPrince, HarmonicOscillatorOnePeriod) {
  StepperOptions o;
  o.rtol = 1e-12;
  o.atol = 1e-14;
  auto st = make_stepper<2>(oscillator, 0.0, {1.0, 0.0}, o);
  advance_to(st, 2.0 * M_PI);
  EXPECT_DOUBLE_EQ(st.t(), 2.0 * M_PI);
  EXPECT_NEAR(st.y()[0], 1.0, 1e-10);
  EXPECT_NEAR(st.y()[1], 0.0, 1e-10);
}

TEST(DormandPrince, ErrorScalesWithTolerance) {
  auto run = [](double tol) {
    StepperOptions o;
    o.rtol = tol;
    o.atol = tol;
    auto st = make_stepper<1>([](double t, const State<1>&, State<1>& d) {
      d[0] = std::cos(t);
      return true;
    }, 0.0, {0.0}, o);
    while (st.t() < 10.0) st.step(10.0 - st.t());
    return std::abs(st.y()[0] - std::sin(10.0));
  };
  const double coarse = run(1e-6);
  const double fine = run(1e-10);
  EXPECT_LT(fine, coarse);
  EXPECT_LT(fine, 1e-8);
}

TEST(DormandPrince, FifthOrderWithFixedSteps) {
  // Forcing fixed steps through h_cap with a loose tolerance exposes the order.
  auto err = [](int n) {
    StepperOptions o;
    o.rtol = 1.0;
    o.atol = 1.0;
    auto st = make_stepper<1>([](double, const State<1>& y, State<1>& d) {
      d[0] = -y[0];
      return true;
    }, 0.0, {1.0}, o);
    const double h = 1.0 / n;
    for (int i = 0; i < n; ++i) st.step(std::min(h, 1.0 - st.t()));
    return std::abs(st.y()[0] - std::exp(-1.0));
  };
  const double ratio = err(10) / err(20);
  EXPECT_GT(ratio, 24.0);  // 2^5 = 32 asymptotically
  EXPECT_LT(ratio, 40.0);
}

TEST(DenseSegment, InterpolatesWithinStep) {
  StepperOptions o;
  o.rtol = 1e-12;
  o.atol = 1e-14;
  auto st = make_stepper<2>(oscillator, 0.0, {1.0, 0.0}, o);
  double worst = 0.0;
  while (st.t() < 5.0) {
    ASSERT_EQ(st.step(), StepStatus::Accepted);
    const auto& seg = st.last();
    EXPECT_EQ(seg(seg.t0), seg.y0);
    for (int k = 1; k < 8; ++k) {
      const double t = seg.t0 + seg.h * k / 8.0;
      worst = std::max(worst, std::abs(seg(t)[0] - std::cos(t)));
    }
    EXPECT_NEAR(seg(seg.t1())[0], seg.y1[0], 1e-14);
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(DormandPrince, DomainViolationShrinksStep) {
  // y' = 1 on y < 1: the integrator must creep up on the boundary instead of stepping over it.
  auto rhs = [](double, const State<1>& y, State<1>& d) {
    if (y[0] >= 1.0) return false;
    d[0] = 1.0;
    return true;
  };
  StepperOptions o;
  o.h_init = 0.3;
  auto st = make_stepper<1>(rhs, 0.0, {0.0}, o);
  for (int i = 0; i < 50 && st.step() == StepStatus::Accepted; ++i) EXPECT_LT(st.y()[0], 1.0);
  EXPECT_GT(st.rejected(), 0u);
}

TEST(DormandPrince, InitialStateOutsideDomainThrows) {
  auto rhs = [](double, const State<1>&, State<1>&) { return false; };
  EXPECT_THROW(make_stepper<1>(rhs, 0.0, {0.0}, {}), std::invalid_argument);
}

TEST(LocateCrossing, FindsRoot) {
  const double r = locate_crossing([](double t) { return t * t - 2.0; }, 0.0, 2.0, 1e-13);
  EXPECT_NEAR(r, std::sqrt(2.0), 1e-12);
  EXPECT_GE(r * r - 2.0, 0.0);  // returned on the side of g(b)
}

TEST(Roots, NewtonBisectQuadratic) {
  auto fn = [](double x) { return std::pair<double, double>{x * x - 2.0, 2.0 * x}; };
  const auto r = newton_bisect(fn, 0.0, 3.0, 1e-15);
  EXPECT_NEAR(r.x, std::sqrt(2.0), 1e-15);
  const auto s = newton_bisect(fn, 3.0, 0.0, 1e-15);  // reversed bracket
  EXPECT_NEAR(s.x, std::sqrt(2.0), 1e-15);
}

TEST(Roots, NewtonBisectFlatDerivativeFallsBack) {
  auto fn = [](double x) { return std::pair<double, double>{std::cbrt(x - 0.3), 0.0}; };
  EXPECT_NEAR(newton_bisect(fn, -1.0, 1.0, 1e-6).x, 0.3, 1e-12);
}

TEST(Roots, Bisect) {
  EXPECT_NEAR(bisect([](double x) { return std::cos(x); }, 0.0, 3.0, 1e-13), M_PI / 2, 1e-12);
}
