#pragma once

// Bracketing scalar root finders.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <tuple>
#include <utility>

namespace mems {

struct RootResult {
  double x = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
};

/// Safeguarded Newton iteration on a sign-changing bracket [lo, hi].
///
/// `fn(x)` returns the pair (value, derivative). A Newton step that leaves the
/// current bracket, or fails to halve the residual, is replaced by bisection,
/// so convergence is guaranteed once the endpoints differ in sign. Iteration
/// stops when |value| <= ftol or the bracket can no longer be split.
template <class Fn>
RootResult newton_bisect(Fn&& fn, double lo, double hi, double ftol,
                         std::size_t max_iter = 400) {
  auto [flo, dlo] = fn(lo);
  auto [fhi, dhi] = fn(hi);
  (void)dlo;
  (void)dhi;
  if (flo == 0.0) return {lo, 0.0, 0};
  if (fhi == 0.0) return {hi, 0.0, 0};
  if ((flo < 0.0) == (fhi < 0.0)) {
    throw std::invalid_argument("newton_bisect: endpoints do not bracket a root");
  }
  // Orient so that value(lo) < 0 < value(hi).
  if (flo > 0.0) std::swap(lo, hi);

  double x = 0.5 * (lo + hi);
  auto [fx, dfx] = fn(x);
  double last_abs = std::abs(fx);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    if (std::abs(fx) <= ftol) return {x, fx, it};
    if (fx < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) return {x, fx, it};

    double next = mid;
    if (dfx != 0.0) {
      const double newton = x - fx / dfx;
      const bool inside = (newton - lo) * (newton - hi) < 0.0;
      if (inside) next = newton;
    }
    auto [fn_next, dfn_next] = fn(next);
    if (next != mid && std::abs(fn_next) > 0.5 * last_abs) {
      // Newton is stalling; fall back to a bisection step.
      next = mid;
      std::tie(fn_next, dfn_next) = fn(next);
    }
    x = next;
    fx = fn_next;
    dfx = dfn_next;
    last_abs = std::abs(fx);
  }
  return {x, fx, max_iter};
}

/// Plain bisection on a sign change of `fn` over [lo, hi] until the bracket
/// width is at most `xtol`. Returns the midpoint of the final bracket.
template <class Fn>
double bisect(Fn&& fn, double lo, double hi, double xtol, std::size_t max_iter = 2000) {
  double flo = fn(lo);
  const double fhi = fn(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) {
    throw std::invalid_argument("bisect: endpoints do not bracket a root");
  }
  for (std::size_t it = 0; it < max_iter && std::abs(hi - lo) > xtol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double fm = fn(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace mems
