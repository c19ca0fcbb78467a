#pragma once

// Stationary solutions, their linear stability, and the damping level above
// which the saddle's unstable branch connects to the stable equilibrium.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "mems/model.hpp"
#include "mems/roots.hpp"

namespace mems {

/// Largest lambda admitting a stationary solution: -g(-1/3) = 4/27.
constexpr double static_pullin() noexcept { return 4.0 / 27.0; }

inline constexpr double kDegeneracyTol = 1e-12;
inline constexpr double kRootResidualTol = 1e-14;

enum class EquilibriumKind { Pair, Degenerate, None };

inline std::string_view to_string(EquilibriumKind k) {
  switch (k) {
    case EquilibriumKind::Pair: return "pair";
    case EquilibriumKind::Degenerate: return "degenerate";
    case EquilibriumKind::None: return "none";
  }
  return "?";
}

/// Stationary points (x1, 0) and (x2, 0) with x1 <= -1/3 <= x2.
/// x1 and x2 are NaN when kind == None.
struct Equilibria {
  EquilibriumKind kind = EquilibriumKind::None;
  double x1 = std::numeric_limits<double>::quiet_NaN();
  double x2 = std::numeric_limits<double>::quiet_NaN();

  bool exist() const noexcept { return kind != EquilibriumKind::None; }
};

namespace detail {

inline double solve_cubic_branch(double lambda, double lo, double hi) {
  auto fn = [lambda](double x) {
    const double s = 1.0 + x;
    // g(x) + lambda and g'(x) = (1+x)(1+3x)
    return std::pair<double, double>{x * s * s + lambda, s * (1.0 + 3.0 * x)};
  };
  return newton_bisect(fn, lo, hi, kRootResidualTol).x;
}

}  // namespace detail

inline Equilibria equilibria(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("equilibria: lambda must be positive");
  constexpr double third = 1.0 / 3.0;
  if (std::abs(lambda - static_pullin()) <= kDegeneracyTol) {
    return {EquilibriumKind::Degenerate, -third, -third};
  }
  if (lambda > static_pullin()) return {};
  Equilibria eq;
  eq.kind = EquilibriumKind::Pair;
  eq.x1 = detail::solve_cubic_branch(lambda, -1.0 + kDomainGuard, -third);
  eq.x2 = detail::solve_cubic_branch(lambda, -third, -kDomainGuard);
  return eq;
}

enum class StabilityLabel { Saddle, StableNode, StableFocus, Center, DegenerateCenterDirection };

inline std::string_view to_string(StabilityLabel l) {
  switch (l) {
    case StabilityLabel::Saddle: return "saddle";
    case StabilityLabel::StableNode: return "stable-node";
    case StabilityLabel::StableFocus: return "stable-focus";
    case StabilityLabel::Center: return "center";
    case StabilityLabel::DegenerateCenterDirection: return "degenerate-center-direction";
  }
  return "?";
}

struct StabilityReport {
  std::complex<double> mu_plus;
  std::complex<double> mu_minus;
  StabilityLabel label = StabilityLabel::Saddle;
  double stiffness = 0.0;  // df/dx at the equilibrium
  double residual = 0.0;   // f(x_eq, lambda)
};

/// Linearisation at (x_eq, 0): eigenvalues -alpha/2 +- sqrt(alpha^2/4 - df/dx).
///
/// Real roots are formed as mu_minus = -(alpha/2 + s), mu_plus = (df/dx)/mu_minus
/// to avoid cancellation. Throws if x_eq is not stationary to within 1e-8.
inline StabilityReport stability(double x_eq, const Params& p) {
  validate(p);
  StabilityReport r;
  r.residual = force(x_eq, p.lambda);
  if (std::abs(r.residual) > 1e-8) {
    std::ostringstream os;
    os.precision(17);
    os << "stability: x = " << x_eq << " is not an equilibrium (residual " << r.residual << ")";
    throw std::invalid_argument(os.str());
  }
  const double k = dforce_dx(x_eq, p.lambda);
  r.stiffness = k;
  const double half = 0.5 * p.alpha;
  const double disc = half * half - k;

  // Near the fold k is about (27/4)(4/27 - lambda), so any lambda that
  // equilibria() reports as degenerate lands inside this band.
  if (std::abs(k) <= 7.0 * kDegeneracyTol) {
    r.mu_plus = 0.0;
    r.mu_minus = 0.0 - p.alpha;
    r.label = StabilityLabel::DegenerateCenterDirection;
    return r;
  }
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    const double lo = -(half + s);
    r.mu_minus = lo;
    r.mu_plus = (lo != 0.0) ? k / lo : 0.0;
  } else {
    const double w = std::sqrt(-disc);
    r.mu_plus = {0.0 - half, w};  // 0.0 - half keeps alpha = 0 at +0
    r.mu_minus = {0.0 - half, -w};
  }
  if (k < 0.0) {
    r.label = StabilityLabel::Saddle;
  } else if (p.alpha == 0.0) {
    r.label = StabilityLabel::Center;
  } else if (p.alpha >= 2.0 * std::sqrt(k) - kDegeneracyTol) {
    r.label = StabilityLabel::StableNode;
  } else {
    r.label = StabilityLabel::StableFocus;
  }
  return r;
}

/// s(lambda) = sup_x f(x)/(x - x2) = df/dx(x2(lambda), lambda).
inline double fisher_slope(double lambda) {
  if (!(lambda > 0.0 && lambda < static_pullin())) {
    throw std::invalid_argument("fisher_slope: lambda must lie in (0, 4/27)");
  }
  return dforce_dx(equilibria(lambda).x2, lambda);
}

/// 2 sqrt(s(lambda)): above this damping the stable point is a node and the
/// saddle's right unstable branch runs into it.
inline double heteroclinic_threshold(double lambda) {
  return 2.0 * std::sqrt(std::max(0.0, fisher_slope(lambda)));
}

}  // namespace mems
