#pragma once

// Dynamic pull-in thresholds.
//
// alpha_star(lambda): the damping separating touchdown (below) from stable
// operation (above) for the orbit started from rest. lambda_d_star(alpha) is
// its inverse. Both are found by bisection on a regime predicate, evaluated
// either from the manifold crossing sign or from direct trajectory outcomes.

#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mems/dynamics.hpp"
#include "mems/manifold.hpp"
#include "mems/parallel.hpp"
#include "mems/steady.hpp"

namespace mems {

enum class ThresholdMethod { ManifoldCrossing, TrajectoryBisection };

inline std::string_view to_string(ThresholdMethod m) {
  return m == ThresholdMethod::ManifoldCrossing ? "manifold" : "trajectory";
}

inline double default_tolerance(ThresholdMethod m) {
  return m == ThresholdMethod::ManifoldCrossing ? 1e-8 : 1e-6;
}

struct ThresholdOptions {
  double tol = 0.0;  // 0 selects default_tolerance(method)
  double alpha_cap = 1e4;
  IntegrationOptions integration;
  TraceOptions trace;
};

/// Regime of the orbit from rest as seen by one method.
enum class Side { Touchdown, Stable, Undecided };

inline Side regime_side(const Params& p, ThresholdMethod m, const ThresholdOptions& o = {}) {
  if (m == ThresholdMethod::ManifoldCrossing) {
    if (!(p.lambda < static_pullin())) return Side::Touchdown;
    const auto xb = crossing_x_bar(p, o.trace);
    if (!xb || *xb > 0.0) return Side::Stable;
    return *xb < 0.0 ? Side::Touchdown : Side::Undecided;
  }
  const auto out = classify(p, o.integration);
  if (is_touchdown(out)) return Side::Touchdown;
  if (is_stable(out)) return Side::Stable;
  return Side::Undecided;
}

struct ThresholdPoint {
  double lambda = 0.0;
  double alpha_star = 0.0;
  ThresholdMethod method = ThresholdMethod::ManifoldCrossing;
  double half_width = 0.0;
  bool resolved = true;  // false if bisection stopped on an undecided midpoint
};

/// alpha*(lambda) for lambda in (1/8, 4/27). The upper end of the bracket
/// starts at 1 and doubles until it is stable; then the bracket is halved
/// until its half-width is at most tol.
inline ThresholdPoint alpha_star(double lambda, ThresholdMethod method,
                                 const ThresholdOptions& o = {}) {
  if (!(lambda > 0.125 && lambda < static_pullin())) {
    throw std::invalid_argument("alpha_star: lambda must lie strictly inside (1/8, 4/27)");
  }
  const double tol = o.tol > 0.0 ? o.tol : default_tolerance(method);
  auto side = [&](double a) { return regime_side({lambda, a}, method, o); };

  ThresholdPoint pt;
  pt.lambda = lambda;
  pt.method = method;
  if (side(0.0) != Side::Touchdown) {
    throw ComputationError("alpha_star: undamped orbit is not in the touchdown regime");
  }
  double lo = 0.0;
  double hi = 1.0;
  for (;;) {
    if (hi > o.alpha_cap) {
      std::ostringstream os;
      os << "alpha_star: no stable damping found up to alpha = " << o.alpha_cap
         << " for lambda = " << lambda;
      throw ComputationError(os.str());
    }
    const Side s = side(hi);
    if (s == Side::Stable) break;
    if (s == Side::Undecided) {
      pt.alpha_star = hi;
      pt.half_width = 0.5 * (hi - lo);
      pt.resolved = false;
      return pt;
    }
    lo = hi;
    hi *= 2.0;
  }
  while (0.5 * (hi - lo) > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const Side s = side(mid);
    if (s == Side::Touchdown) {
      lo = mid;
    } else if (s == Side::Stable) {
      hi = mid;
    } else {
      pt.alpha_star = mid;
      pt.half_width = 0.5 * (hi - lo);
      pt.resolved = false;
      return pt;
    }
  }
  pt.alpha_star = 0.5 * (lo + hi);
  pt.half_width = 0.5 * (hi - lo);
  return pt;
}

inline constexpr double kLambdaBracketInset = 1e-9;

struct LambdaThreshold {
  double alpha = 0.0;
  double lambda_d = 0.0;
  double half_width = 0.0;
  ThresholdMethod method = ThresholdMethod::TrajectoryBisection;
  bool saturated = false;  // no touchdown found below the top of the bracket
  bool resolved = true;
};

/// Bisection in lambda on (1/8 + 1e-9, 4/27 - 1e-9) at fixed alpha with the
/// touchdown predicate. The endpoints are taken as stable / touchdown without
/// evaluation. `saturated` reports that every probe was stable, i.e. the
/// threshold is indistinguishable from the static value 4/27.
inline LambdaThreshold lambda_threshold(double alpha, ThresholdMethod method,
                                        const ThresholdOptions& o = {}) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("lambda_d_star: alpha must be nonnegative");
  }
  const double tol = o.tol > 0.0 ? o.tol : default_tolerance(method);
  double lo = 0.125 + kLambdaBracketInset;
  double hi = static_pullin() - kLambdaBracketInset;
  LambdaThreshold r;
  r.alpha = alpha;
  r.method = method;
  r.saturated = true;
  while (0.5 * (hi - lo) > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const Side s = regime_side({mid, alpha}, method, o);
    if (s == Side::Touchdown) {
      hi = mid;
      r.saturated = false;
    } else if (s == Side::Stable) {
      lo = mid;
    } else {
      r.lambda_d = mid;
      r.half_width = 0.5 * (hi - lo);
      r.resolved = false;
      r.saturated = false;
      return r;
    }
  }
  r.lambda_d = 0.5 * (lo + hi);
  r.half_width = 0.5 * (hi - lo);
  return r;
}

/// lambda_d*(alpha). alpha = 0 is answered exactly by the energy balance of
/// the undamped system.
inline LambdaThreshold lambda_d_star_point(double alpha,
                                           ThresholdMethod method = ThresholdMethod::TrajectoryBisection,
                                           const ThresholdOptions& o = {}) {
  if (alpha == 0.0) {
    LambdaThreshold r;
    r.alpha = 0.0;
    r.method = method;
    r.lambda_d = lambda_d_conservative();
    r.half_width = 5e-13;
    return r;
  }
  return lambda_threshold(alpha, method, o);
}

inline double lambda_d_star(double alpha, double tol = 0.0,
                            ThresholdMethod method = ThresholdMethod::TrajectoryBisection) {
  ThresholdOptions o;
  o.tol = tol;
  return lambda_d_star_point(alpha, method, o).lambda_d;
}

struct CurveFailure {
  double alpha = 0.0;
  std::string message;
};

struct PullInCurve {
  std::vector<LambdaThreshold> points;  // in grid order; failed points omitted
  std::vector<CurveFailure> failures;
  std::vector<std::string> violations;  // broken shape invariants
  ThresholdMethod method = ThresholdMethod::TrajectoryBisection;
  double tol = 0.0;
};

namespace detail {

inline void check_grid(const std::vector<double>& grid, bool allow_zero) {
  if (grid.empty()) throw std::invalid_argument("grid must be nonempty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || grid[i] < 0.0 || (!allow_zero && grid[i] == 0.0)) {
      throw std::invalid_argument("grid values must be finite and nonnegative");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("grid must be strictly increasing");
    }
  }
}

}  // namespace detail

/// Range and ordering checks for a computed curve: lambda_d strictly
/// increasing, alpha = 0 at 1/8 within 1e-10, and every alpha > 0 strictly
/// inside (1/8, 4/27) by more than 1e-8.
inline std::vector<std::string> curve_violations(const std::vector<LambdaThreshold>& pts) {
  std::vector<std::string> v;
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    os.str("");
    if (p.alpha == 0.0) {
      if (std::abs(p.lambda_d - 0.125) > 1e-10) {
        os << "alpha=0: lambda_d=" << p.lambda_d << " differs from 1/8";
        v.push_back(os.str());
      }
    } else if (!(p.lambda_d - 0.125 > 1e-8 && static_pullin() - p.lambda_d > 1e-8)) {
      os << "alpha=" << p.alpha << ": lambda_d=" << p.lambda_d << " not inside (1/8, 4/27)"
         << (p.saturated ? " (saturated at the static value)" : "");
      v.push_back(os.str());
    }
    if (i > 0 && !(p.lambda_d > pts[i - 1].lambda_d)) {
      os.str("");
      os << "lambda_d not increasing between alpha=" << pts[i - 1].alpha << " and alpha=" << p.alpha;
      v.push_back(os.str());
    }
  }
  return v;
}

/// lambda_d* over an increasing alpha grid, one worker task per grid point.
inline PullInCurve sweep_curve(const std::vector<double>& alpha_grid, ThresholdMethod method,
                               const ThresholdOptions& o = {}, std::size_t jobs = 1) {
  detail::check_grid(alpha_grid, true);
  PullInCurve curve;
  curve.method = method;
  curve.tol = o.tol > 0.0 ? o.tol : default_tolerance(method);
  auto results = parallel_map<LambdaThreshold>(alpha_grid.size(), jobs, [&](std::size_t i) {
    return lambda_d_star_point(alpha_grid[i], method, o);
  });
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].value) {
      curve.points.push_back(*results[i].value);
    } else {
      curve.failures.push_back({alpha_grid[i], results[i].error});
    }
  }
  curve.violations = curve_violations(curve.points);
  return curve;
}

}  // namespace mems
