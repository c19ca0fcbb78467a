#pragma once

// Dormand-Prince 5(4) embedded Runge-Kutta pair with FSAL and the fourth-order
// continuous extension of Hairer & Wanner's DOPRI5. Fixed-size states only.
//
// The right-hand side is a callable `bool rhs(double t, const State& y, State& dy)`
// returning false when y lies outside its domain; the stepper then rejects
// the trial step and retries with a smaller one.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>

namespace mems::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct StepperOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 0.0;  // 0 selects a starting step automatically
  double h_max = std::numeric_limits<double>::infinity();
  double safety = 0.9;
  double fac_min = 0.2;
  double fac_max = 10.0;
};

/// Continuous extension of one accepted step over [t0, t0 + h].
template <std::size_t N>
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  State<N> y0{};
  State<N> y1{};
  std::array<State<N>, 4> coef{};

  double t1() const noexcept { return t0 + h; }

  State<N> operator()(double t) const noexcept {
    const double th = (h != 0.0) ? (t - t0) / h : 0.0;
    const double th1 = 1.0 - th;
    State<N> out;
    for (std::size_t i = 0; i < N; ++i) {
      out[i] = y0[i] +
               th * (coef[0][i] + th1 * (coef[1][i] + th * (coef[2][i] + th1 * coef[3][i])));
    }
    return out;
  }
};

enum class StepStatus { Accepted, StepUnderflow };

namespace dp {
// Butcher tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
// Error weights (fifth minus fourth order).
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense output.
inline constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                        d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                        d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
}  // namespace dp

template <std::size_t N, class Rhs>
class DormandPrince {
 public:
  using StateT = State<N>;

  DormandPrince(Rhs rhs, double t0, const StateT& y0, const StepperOptions& opts)
      : rhs_(std::move(rhs)), opts_(opts), t_(t0), y_(y0) {
    if (!(opts_.rtol > 0.0) || !(opts_.atol > 0.0)) {
      throw std::invalid_argument("DormandPrince: tolerances must be positive");
    }
    if (!rhs_(t_, y_, k1_)) {
      throw std::invalid_argument("DormandPrince: initial state outside the rhs domain");
    }
    h_ = opts_.h_init > 0.0 ? opts_.h_init : initial_step();
  }

  double t() const noexcept { return t_; }
  const StateT& y() const noexcept { return y_; }
  const StateT& dydt() const noexcept { return k1_; }
  double next_step() const noexcept { return h_; }
  std::size_t accepted() const noexcept { return accepted_; }
  std::size_t rejected() const noexcept { return rejected_; }
  const DenseSegment<N>& last() const noexcept { return seg_; }

  /// Advance by one accepted step of size at most `h_cap`.
  StepStatus step(double h_cap = std::numeric_limits<double>::infinity()) {
    double h = std::min({h_, h_cap, opts_.h_max});
    const double h_floor = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_));
    bool last_failed = false;
    while (true) {
      if (!(h > h_floor)) return StepStatus::StepUnderflow;
      StateT y_new, err;
      if (!attempt(h, y_new, err)) {
        ++rejected_;
        h *= 0.25;
        last_failed = true;
        continue;
      }
      const double e = error_norm(err, y_new);
      if (e <= 1.0) {
        double fac = (e == 0.0) ? opts_.fac_max
                                : std::clamp(opts_.safety * std::pow(e, -0.2), opts_.fac_min,
                                             opts_.fac_max);
        if (last_failed) fac = std::min(fac, 1.0);
        commit(h, y_new);
        h_ = h * fac;
        return StepStatus::Accepted;
      }
      ++rejected_;
      last_failed = true;
      h *= std::max(opts_.fac_min, opts_.safety * std::pow(e, -0.2));
    }
  }

 private:
  double error_norm(const StateT& err, const StateT& y_new) const noexcept {
    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opts_.atol + opts_.rtol * std::max(std::abs(y_[i]), std::abs(y_new[i]));
      const double r = err[i] / sc;
      sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(N));
  }

  // Hairer's starting step heuristic.
  double initial_step() {
    auto norm = [this](const StateT& v) {
      double s = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double sc = opts_.atol + opts_.rtol * std::abs(y_[i]);
        s += (v[i] / sc) * (v[i] / sc);
      }
      return std::sqrt(s / static_cast<double>(N));
    };
    const double d0 = norm(y_);
    const double d1 = norm(k1_);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, opts_.h_max);
    StateT y1, f1;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y_[i] + h0 * k1_[i];
    if (!rhs_(t_ + h0, y1, f1)) return h0;
    StateT df;
    for (std::size_t i = 0; i < N; ++i) df[i] = f1[i] - k1_[i];
    const double d2 = norm(df) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    return std::min({100.0 * h0, h1, opts_.h_max});
  }

  bool attempt(double h, StateT& y_new, StateT& err) {
    using namespace dp;
    failed_rhs_ = false;
    StateT tmp;
    auto stage = [&](double c, auto&& combine, StateT& k) {
      for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * combine(i);
      if (!rhs_(t_ + c * h, tmp, k)) {
        failed_rhs_ = true;
        return false;
      }
      return true;
    };
    if (!stage(c2, [&](std::size_t i) { return a21 * k1_[i]; }, k2_)) return false;
    if (!stage(c3, [&](std::size_t i) { return a31 * k1_[i] + a32 * k2_[i]; }, k3_)) return false;
    if (!stage(c4, [&](std::size_t i) { return a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]; }, k4_))
      return false;
    if (!stage(c5,
               [&](std::size_t i) {
                 return a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i];
               },
               k5_))
      return false;
    if (!stage(1.0,
               [&](std::size_t i) {
                 return a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i];
               },
               k6_))
      return false;
    for (std::size_t i = 0; i < N; ++i) {
      y_new[i] = y_[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] +
                              a76 * k6_[i]);
    }
    if (!rhs_(t_ + h, y_new, k7_)) {
      failed_rhs_ = true;
      return false;
    }
    for (std::size_t i = 0; i < N; ++i) {
      err[i] = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] +
                    e7 * k7_[i]);
    }
    return true;
  }

  void commit(double h, const StateT& y_new) {
    using namespace dp;
    seg_.t0 = t_;
    seg_.h = h;
    seg_.y0 = y_;
    seg_.y1 = y_new;
    for (std::size_t i = 0; i < N; ++i) {
      const double ydiff = y_new[i] - y_[i];
      const double bspl = h * k1_[i] - ydiff;
      seg_.coef[0][i] = ydiff;
      seg_.coef[1][i] = bspl;
      seg_.coef[2][i] = ydiff - h * k7_[i] - bspl;
      seg_.coef[3][i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] +
                             d6 * k6_[i] + d7 * k7_[i]);
    }
    t_ += h;
    y_ = y_new;
    k1_ = k7_;
    ++accepted_;
  }

  Rhs rhs_;
  StepperOptions opts_;
  double t_;
  StateT y_;
  double h_ = 0.0;
  StateT k1_{}, k2_{}, k3_{}, k4_{}, k5_{}, k6_{}, k7_{};
  DenseSegment<N> seg_{};
  std::size_t accepted_ = 0;
  std::size_t rejected_ = 0;
  bool failed_rhs_ = false;
};

template <std::size_t N, class Rhs>
DormandPrince<N, Rhs> make_stepper(Rhs rhs, double t0, const State<N>& y0,
                                   const StepperOptions& opts) {
  return DormandPrince<N, Rhs>(std::move(rhs), t0, y0, opts);
}

/// Bisect `g(t)` on [a, b] (sign change assumed) to width `tol`.
/// Returns the end of the final bracket on the side where g has the sign of g(b).
template <class G>
double locate_crossing(G&& g, double a, double b, double tol) {
  double ga = g(a);
  for (int it = 0; it < 400 && (b - a) > tol; ++it) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b) break;
    const double gm = g(m);
    if ((gm < 0.0) == (ga < 0.0) && gm != 0.0) {
      a = m;
      ga = gm;
    } else {
      b = m;
    }
  }
  return b;
}

}  // namespace mems::ode
