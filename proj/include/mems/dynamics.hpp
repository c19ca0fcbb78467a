#pragma once

// Orbits of the planar system, touchdown event location, regime classification
// of parameter points, and the energy analysis of the undamped case.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "mems/model.hpp"
#include "mems/ode.hpp"
#include "mems/roots.hpp"
#include "mems/steady.hpp"

namespace mems {

class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IntegrationOptions {
  double t_max = 2000.0;
  double rtol = 1e-10;
  double atol = 1e-12;
  double touchdown_gap = 1e-6;  // touchdown is declared on x = -1 + gap
  std::size_t max_steps = 5'000'000;
  double event_tol = 1e-10;     // time resolution of located events
  double sample_dt = 0.0;       // 0 records every accepted step
  double saddle_tol = 1e-6;     // radius of the ball around (x1, 0)
  double saddle_dwell = 50.0;   // time to remain in that ball
  double trap_margin = 1e-12;   // energy margin below the saddle level

  void check() const {
    if (!(t_max > 0.0) || !(rtol > 0.0) || !(atol > 0.0) || !(touchdown_gap > 0.0) ||
        !(event_tol > 0.0) || !(sample_dt >= 0.0) || !(saddle_tol > 0.0) ||
        !(saddle_dwell > 0.0) || !(trap_margin >= 0.0) || max_steps == 0) {
      throw std::invalid_argument("IntegrationOptions: tolerances must be positive");
    }
  }
};

// Regimes of the orbit started from rest.
struct ConvergedStable {
  double x2 = 0.0;
  double t_detect = 0.0;
};
struct ConvergedSaddle {
  double x1 = 0.0;
  double t_detect = 0.0;
};
struct Touchdown {
  double t_td = 0.0;
};
struct BudgetExhausted {
  std::string reason;
  double t_stop = 0.0;
};

using Outcome = std::variant<ConvergedStable, ConvergedSaddle, Touchdown, BudgetExhausted>;

inline std::string_view outcome_name(const Outcome& o) {
  return std::visit(
      [](const auto& v) -> std::string_view {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ConvergedStable>) return "converged-stable";
        if constexpr (std::is_same_v<T, ConvergedSaddle>) return "converged-saddle";
        if constexpr (std::is_same_v<T, Touchdown>) return "touchdown";
        return "budget-exhausted";
      },
      o);
}

inline bool is_touchdown(const Outcome& o) { return std::holds_alternative<Touchdown>(o); }
inline bool is_stable(const Outcome& o) { return std::holds_alternative<ConvergedStable>(o); }

struct TrajectoryStats {
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;
  double min_gap = std::numeric_limits<double>::infinity();
};

struct Trajectory {
  std::vector<PhaseState> samples;
  Outcome outcome;
  TrajectoryStats stats;
};

namespace detail {

using Segment = ode::DenseSegment<2>;

inline auto planar_rhs(const Params& p) {
  return [p](double, const ode::State<2>& s, ode::State<2>& ds) {
    if (!in_domain(s[0])) return false;
    ds[0] = s[1];
    ds[1] = -(p.alpha * s[1] + force_unchecked(s[0], p.lambda));
    return true;
  };
}

struct RunResult {
  std::optional<Outcome> outcome;  // empty: t_max reached
  PhaseState last;
  TrajectoryStats stats;
};

// Drives the stepper from `initial` until touchdown, t_max, the step budget,
// or until `observer(segment, t_end)` returns an outcome. The observer sees
// every accepted step; on touchdown the final call has t_end = t_td.
template <class Observer>
RunResult run(const Params& p, const PhaseState& initial, const IntegrationOptions& o,
              Observer&& observer) {
  validate(p);
  o.check();
  const double wall = -1.0 + o.touchdown_gap;
  if (!(initial.x > wall)) {
    throw std::invalid_argument("initial state is inside the touchdown gap");
  }
  ode::StepperOptions so;
  so.rtol = o.rtol;
  so.atol = o.atol;
  auto stepper = ode::make_stepper<2>(planar_rhs(p), initial.t, {initial.x, initial.y}, so);
  const double t_end = initial.t + o.t_max;

  RunResult res;
  auto sync = [&] {
    res.stats.steps = stepper.accepted();
    res.stats.rejected_steps = stepper.rejected();
    res.last = {stepper.t(), stepper.y()[0], stepper.y()[1]};
  };

  while (stepper.t() < t_end) {
    if (stepper.accepted() >= o.max_steps) {
      sync();
      res.outcome = BudgetExhausted{"step budget exhausted", stepper.t()};
      return res;
    }
    double cap = t_end - stepper.t();
    const double x = stepper.y()[0];
    if (x < -0.9) {
      // Keep each step well inside the remaining gap to the pole.
      cap = std::min(cap, 0.1 * (1.0 + x) / std::max(1.0, std::abs(stepper.y()[1])));
    }
    if (stepper.step(cap) != ode::StepStatus::Accepted) {
      sync();
      std::ostringstream os;
      os.precision(17);
      os << "step size underflow at x = " << stepper.y()[0];
      res.outcome = BudgetExhausted{os.str(), stepper.t()};
      return res;
    }
    const Segment& seg = stepper.last();
    if (seg.y1[0] <= wall) {
      const double t_td = ode::locate_crossing(
          [&](double t) { return seg(t)[0] - wall; }, seg.t0, seg.t1(), o.event_tol);
      observer(seg, t_td);
      sync();
      const auto s = seg(t_td);
      res.last = {t_td, s[0], s[1]};
      res.outcome = Touchdown{t_td};
      return res;
    }
    if (auto out = observer(seg, seg.t1())) {
      sync();
      res.outcome = std::move(out);
      return res;
    }
  }
  sync();
  return res;
}

// Records samples either at every accepted step or on a uniform time grid.
class Sampler {
 public:
  Sampler(const PhaseState& initial, double dt) : dt_(dt), t0_(initial.t) { push(initial); }

  void add(const Segment& seg, double t_end) {
    if (dt_ > 0.0) {
      for (;;) {
        const double t = t0_ + static_cast<double>(next_k_) * dt_;
        if (t > t_end) break;
        const auto s = seg(t);
        push({t, s[0], s[1]});
        ++next_k_;
      }
    } else {
      const auto s = (t_end == seg.t1()) ? seg.y1 : seg(t_end);
      push({t_end, s[0], s[1]});
    }
  }

  void finish(const PhaseState& last) {
    if (samples_.empty() || last.t > samples_.back().t) push(last);
  }

  std::vector<PhaseState> take() { return std::move(samples_); }

 private:
  void push(const PhaseState& s) {
    if (!samples_.empty() && !(s.t > samples_.back().t)) return;
    samples_.push_back(s);
  }

  double dt_;
  double t0_;
  std::size_t next_k_ = 1;
  std::vector<PhaseState> samples_;
};

// Regime criteria shared by classify() and integrate().
class RegimeMonitor {
 public:
  RegimeMonitor(const Params& p, const IntegrationOptions& o)
      : p_(p), o_(o), eq_(equilibria(p.lambda)) {
    if (eq_.kind == EquilibriumKind::Pair) {
      saddle_level_ = potential_unchecked(eq_.x1, p.lambda) - o.trap_margin;
    }
  }

  // Energy below the saddle level inside the right well: the orbit is trapped
  // and, being dissipative, converges to (x2, 0).
  bool trapped(double x, double y) const noexcept {
    if (eq_.kind != EquilibriumKind::Pair) return false;
    return x > eq_.x1 && 0.5 * y * y + potential_unchecked(x, p_.lambda) < saddle_level_;
  }

  bool near_saddle(double x, double y) const noexcept {
    if (!eq_.exist()) return false;
    return std::hypot(x - eq_.x1, y) < o_.saddle_tol;
  }

  std::optional<Outcome> check(double t, double x, double y) {
    if (trapped(x, y)) return ConvergedStable{eq_.x2, t};
    if (near_saddle(x, y)) {
      if (!entered_) entered_ = t;
      if (t - *entered_ >= o_.saddle_dwell) return ConvergedSaddle{eq_.x1, t};
    } else {
      entered_.reset();
    }
    return std::nullopt;
  }

  const Equilibria& equilibria_found() const noexcept { return eq_; }

 private:
  Params p_;
  IntegrationOptions o_;
  Equilibria eq_;
  double saddle_level_ = -std::numeric_limits<double>::infinity();
  std::optional<double> entered_;
};

}  // namespace detail

/// Integrates from `initial` to touchdown or t_max.
///
/// The outcome at the horizon is read off the final state: ConvergedStable if
/// it is energy-trapped in the stable well, ConvergedSaddle if it sits in the
/// saddle ball, BudgetExhausted otherwise. The saddle dwell time is not
/// required here because the orbit is not stopped early.
inline Trajectory integrate(const Params& p, const PhaseState& initial,
                            const IntegrationOptions& o = {}) {
  detail::Sampler sampler(initial, o.sample_dt);
  auto res = detail::run(p, initial, o, [&](const detail::Segment& seg, double t_end) {
    sampler.add(seg, t_end);
    return std::optional<Outcome>{};
  });
  sampler.finish(res.last);

  Trajectory tr;
  tr.samples = sampler.take();
  tr.stats = res.stats;
  for (const auto& s : tr.samples) tr.stats.min_gap = std::min(tr.stats.min_gap, 1.0 + s.x);
  if (res.outcome) {
    tr.outcome = std::move(*res.outcome);
  } else {
    detail::RegimeMonitor mon(p, o);
    const auto& eq = mon.equilibria_found();
    if (mon.trapped(res.last.x, res.last.y)) {
      tr.outcome = ConvergedStable{eq.x2, res.last.t};
    } else if (mon.near_saddle(res.last.x, res.last.y)) {
      tr.outcome = ConvergedSaddle{eq.x1, res.last.t};
    } else {
      tr.outcome = BudgetExhausted{"t_max reached", res.last.t};
    }
  }
  return tr;
}

/// Regime of the orbit starting at `initial` (rest at the origin by default).
///
/// ConvergedStable fires as soon as the energy drops below the saddle level
/// with x > x1; ConvergedSaddle after `saddle_dwell` time units inside the
/// saddle ball; Touchdown on reaching the gap surface. Anything else by t_max
/// is BudgetExhausted.
inline Outcome classify(const Params& p, const IntegrationOptions& o = {},
                        const PhaseState& initial = {}) {
  validate(p);
  detail::RegimeMonitor mon(p, o);
  if (auto out = mon.check(initial.t, initial.x, initial.y)) return *out;
  auto res = detail::run(p, initial, o, [&](const detail::Segment& seg, double t_end) {
    return mon.check(t_end, seg.y1[0], seg.y1[1]);
  });
  if (res.outcome) return std::move(*res.outcome);
  return BudgetExhausted{"t_max reached with neither convergence criterion met", res.last.t};
}

// ---------------------------------------------------------------------------
// Positively invariant neighbourhood of the origin for small lambda.

struct InvariantSetReport {
  std::size_t samples = 0;
  std::size_t left_set = 0;     // orbits that left U
  std::size_t not_stable = 0;   // orbits not classified ConvergedStable
  bool holds() const noexcept { return samples > 0 && left_set == 0 && not_stable == 0; }
};

/// U = { x^2 + y^2 < 1/16, E(x, y) <= -lambda }.
inline bool in_small_energy_disc(double x, double y, double lambda, double e_slack = 0.0) {
  if (!detail::in_domain(x)) return false;
  return x * x + y * y < 1.0 / 16.0 &&
         0.5 * y * y + detail::potential_unchecked(x, lambda) <= -lambda + e_slack;
}

/// Draws `n_samples` points of U uniformly (rejection from its bounding box),
/// integrates each over `horizon` time units, and checks every recorded state
/// stays in U (energy slack 1e-12 for roundoff) and that the orbit classifies
/// as ConvergedStable.
inline InvariantSetReport invariant_disc_report(double lambda, double alpha,
                                                 std::size_t n_samples,
                                                 std::uint64_t seed = 20240901,
                                                 double horizon = 100.0) {
  if (!(lambda > 0.0 && lambda < 1.0 / 32.0)) {
    throw std::invalid_argument("invariant disc check: lambda must lie in (0, 1/32)");
  }
  if (!(alpha > 0.0)) throw std::invalid_argument("invariant disc check: alpha must be positive");
  const Params p{lambda, alpha};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-0.25, 0.0);
  std::uniform_real_distribution<double> uy(-0.25, 0.25);

  IntegrationOptions o;
  o.t_max = horizon;
  InvariantSetReport rep;
  while (rep.samples < n_samples) {
    const double x = ux(rng);
    const double y = uy(rng);
    if (!in_small_energy_disc(x, y, lambda)) continue;
    ++rep.samples;
    const auto tr = integrate(p, {0.0, x, y}, o);
    const bool stays = std::all_of(tr.samples.begin(), tr.samples.end(), [&](const PhaseState& s) {
      return in_small_energy_disc(s.x, s.y, lambda, 1e-12);
    });
    if (!stays) ++rep.left_set;
    if (!is_stable(classify(p, {}, {0.0, x, y}))) ++rep.not_stable;
  }
  return rep;
}

inline bool prop2_invariant_check(double lambda, double alpha, std::size_t n_samples) {
  return invariant_disc_report(lambda, alpha, n_samples).holds();
}

// ---------------------------------------------------------------------------
// Undamped case.

struct PhasePoint {
  double x = 0.0;
  double y = 0.0;
};

/// Level set E = E0 of the undamped system over `x_grid`: the upper branch
/// y = +sqrt(2 (E0 - F)) in grid order, then the lower branch in reverse.
/// Points with y = 0 appear once. Grid points at or beyond x = -1 are skipped.
inline std::vector<PhasePoint> conservative_orbit(double lambda, double e0,
                                                  const std::vector<double>& x_grid) {
  if (!(lambda > 0.0)) throw std::invalid_argument("conservative_orbit: lambda must be positive");
  const double clamp_tol = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(e0));
  std::vector<PhasePoint> upper;
  for (double x : x_grid) {
    if (!detail::in_domain(x)) continue;
    double gap = e0 - detail::potential_unchecked(x, lambda);
    if (gap < -clamp_tol) continue;
    gap = std::max(gap, 0.0);
    upper.push_back({x, std::sqrt(2.0 * gap)});
  }
  std::vector<PhasePoint> out = upper;
  for (auto it = upper.rbegin(); it != upper.rend(); ++it) {
    if (it->y > 0.0) out.push_back({it->x, -it->y});
  }
  return out;
}

/// phi(lambda) = F(x1(lambda), lambda) - F(0, lambda): positive iff the
/// homoclinic loop of the undamped saddle encloses the origin.
inline double phi(double lambda) {
  const auto eq = equilibria(lambda);
  if (!eq.exist()) throw std::invalid_argument("phi: no equilibria for lambda > 4/27");
  return potential(eq.x1, lambda) + lambda;
}

/// Root of phi on (1e-6, 4/27), bracket width <= 1e-12.
inline double lambda_d_conservative() {
  return bisect([](double l) { return phi(l); }, 1e-6, static_pullin(), 1e-12);
}

// ---------------------------------------------------------------------------
// Time spent approaching, lingering near, and leaving the saddle.

struct ResidenceProfile {
  double t_approach = 0.0;
  double t_dwell = 0.0;
  double t_collapse = 0.0;
  double t_touchdown = 0.0;
};

inline ResidenceProfile residence_profile(const Params& p, double saddle_radius,
                                          const IntegrationOptions& o = {}) {
  validate(p);
  if (!(saddle_radius > 0.0)) throw std::invalid_argument("residence_profile: radius must be positive");
  const auto eq = equilibria(p.lambda);
  if (!eq.exist()) {
    throw ComputationError("residence_profile: no saddle exists for lambda > 4/27");
  }
  auto dist = [&](const ode::State<2>& s) { return std::hypot(s[0] - eq.x1, s[1]) - saddle_radius; };

  std::optional<double> first_entry;
  double last_exit = 0.0;
  bool inside = dist({0.0, 0.0}) < 0.0;
  if (inside) first_entry = 0.0;
  constexpr int kSub = 8;
  auto res = detail::run(p, {}, o, [&](const detail::Segment& seg, double t_end) {
    double ta = seg.t0;
    double da = dist(seg.y0);
    for (int k = 1; k <= kSub; ++k) {
      const double tb = seg.t0 + (t_end - seg.t0) * k / kSub;
      const double db = dist(seg(tb));
      if ((da < 0.0) != (db < 0.0)) {
        const double tc = ode::locate_crossing([&](double t) { return dist(seg(t)); }, ta, tb,
                                               o.event_tol);
        if (db < 0.0) {
          if (!first_entry) first_entry = tc;
          inside = true;
        } else {
          last_exit = tc;
          inside = false;
        }
      }
      ta = tb;
      da = db;
    }
    return std::optional<Outcome>{};
  });
  if (!res.outcome || !is_touchdown(*res.outcome)) {
    throw ComputationError("residence_profile: orbit does not reach touchdown (outcome " +
                           std::string(res.outcome ? outcome_name(*res.outcome) : "t_max") + ")");
  }
  if (!first_entry) throw ComputationError("residence_profile: orbit never enters the saddle ball");
  const double t_td = std::get<Touchdown>(*res.outcome).t_td;
  if (inside) last_exit = t_td;
  return {*first_entry, last_exit - *first_entry, t_td - last_exit, t_td};
}

}  // namespace mems
