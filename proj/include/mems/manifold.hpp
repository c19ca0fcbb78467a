#pragma once

// The branch of the saddle's stable manifold that bounds the basin of the
// stable equilibrium from below.
//
// Reversing time and the sign of y and shifting u = x - x1 gives
//
//     u' = v,   v' = alpha v - f(u + x1, lambda),
//
// whose unstable branch into the first quadrant is the graph v = Phi(u) with
// dPhi/du = alpha - f(u + x1) / Phi. In original coordinates the branch is
// y = -Phi(x - x1). Where it returns to v = 0 it crosses the x axis at
// x_bar = u_bar + x1; the origin lies in the stable basin iff x_bar > 0
// (or the branch never returns).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mems/model.hpp"
#include "mems/ode.hpp"
#include "mems/steady.hpp"

namespace mems {

struct TraceOptions {
  double u_max = 0.0;          // 0 selects 10 (x2 - x1) + 5
  double rtol = 1e-13;
  double atol = 1e-15;
  double seed_scale = 1e-8;    // seed offset along the eigenvector, times max(1, |x1|)
  double switch_level = 1e-3;  // Phi below this is traced as a planar curve
  double crossing_tol = 1e-12; // arclength resolution of the v = 0 crossing
};

struct ManifoldTrace {
  double lambda = 0.0;
  double alpha = 0.0;
  double x1 = 0.0;
  double x2 = 0.0;
  double mu_plus = 0.0;  // slope of the branch at the saddle
  double seed = 0.0;     // u of the first point off the saddle
  double u_max = 0.0;
  std::vector<double> u_samples;
  std::vector<double> phi_samples;
  std::vector<double> slope_samples;  // dPhi/du; -inf at the crossing
  std::optional<double> crossing;     // u_bar
  std::optional<double> x_bar;        // u_bar + x1

  double u_end() const noexcept { return u_samples.empty() ? 0.0 : u_samples.back(); }

  /// Phi at u in [0, u_end()]: cubic Hermite between samples, linear on the
  /// last interval before a crossing.
  double at(double u) const {
    if (u_samples.empty() || u < 0.0 || u > u_end()) {
      throw std::out_of_range("ManifoldTrace::at: u outside the traced range");
    }
    auto it = std::upper_bound(u_samples.begin(), u_samples.end(), u);
    if (it == u_samples.end()) return phi_samples.back();
    const std::size_t j = static_cast<std::size_t>(it - u_samples.begin());
    const std::size_t i = j - 1;
    const double h = u_samples[j] - u_samples[i];
    const double s = (u - u_samples[i]) / h;
    const double p0 = phi_samples[i], p1 = phi_samples[j];
    const double m0 = slope_samples[i], m1 = slope_samples[j];
    if (!std::isfinite(m0) || !std::isfinite(m1)) return p0 + s * (p1 - p0);
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * h * m0 + (-2 * s3 + 3 * s2) * p1 +
           (s3 - s2) * h * m1;
  }
};

namespace detail {

class TraceBuilder {
 public:
  TraceBuilder(ManifoldTrace& tr) : tr_(tr) {}

  double slope(double u, double phi) const noexcept {
    return tr_.alpha - force_unchecked(u + tr_.x1, tr_.lambda) / phi;
  }

  void push(double u, double phi) {
    if (!tr_.u_samples.empty() && !(u > tr_.u_samples.back())) return;
    tr_.u_samples.push_back(u);
    tr_.phi_samples.push_back(phi);
    tr_.slope_samples.push_back(phi > 0.0 ? slope(u, phi) : -std::numeric_limits<double>::infinity());
  }

 private:
  ManifoldTrace& tr_;
};

}  // namespace detail

/// Traces the branch from a seed on the unstable eigenvector of the shifted
/// saddle. Small values of Phi (near the saddle and near the return to the
/// axis) are followed as a planar curve in arclength; elsewhere the graph ODE
/// is integrated in u. Stops at the crossing or at u_max.
inline ManifoldTrace trace_stable_manifold(const Params& p, const TraceOptions& opts = {}) {
  validate(p);
  if (!(p.lambda < static_pullin())) {
    throw std::invalid_argument("trace_stable_manifold: lambda must lie in (0, 4/27)");
  }
  const auto eq = equilibria(p.lambda);

  ManifoldTrace tr;
  tr.lambda = p.lambda;
  tr.alpha = p.alpha;
  tr.x1 = eq.x1;
  tr.x2 = eq.x2;
  tr.u_max = opts.u_max > 0.0 ? opts.u_max : 10.0 * (eq.x2 - eq.x1) + 5.0;
  const double k = dforce_dx(eq.x1, p.lambda);
  const double half = 0.5 * p.alpha;
  tr.mu_plus = half + std::sqrt(half * half - k);
  tr.seed = opts.seed_scale * std::max(1.0, std::abs(eq.x1));

  detail::TraceBuilder out(tr);
  out.push(0.0, 0.0);
  tr.slope_samples.back() = tr.mu_plus;

  const double x1 = eq.x1;
  const double lambda = p.lambda;
  const double alpha = p.alpha;
  ode::StepperOptions so;
  so.rtol = opts.rtol;
  so.atol = opts.atol;

  // Arclength-parameterised planar field.
  auto planar = [=](double, const ode::State<2>& s, ode::State<2>& ds) {
    if (!detail::in_domain(s[0] + x1)) return false;
    const double du = s[1];
    const double dv = alpha * s[1] - detail::force_unchecked(s[0] + x1, lambda);
    const double n = std::hypot(du, dv);
    if (!(n > 0.0)) return false;
    ds[0] = du / n;
    ds[1] = dv / n;
    return true;
  };
  auto graph = [=](double u, const ode::State<1>& s, ode::State<1>& ds) {
    if (!(s[0] > 0.0) || !detail::in_domain(u + x1)) return false;
    ds[0] = alpha - detail::force_unchecked(u + x1, lambda) / s[0];
    return true;
  };

  double u = tr.seed;
  double v = tr.mu_plus * tr.seed;
  out.push(u, v);
  bool planar_mode = true;
  constexpr std::size_t kMaxSteps = 2'000'000;
  std::size_t steps = 0;

  while (u < tr.u_max) {
    if (planar_mode) {
      auto st = ode::make_stepper<2>(planar, 0.0, {u, v}, so);
      while (true) {
        if (++steps > kMaxSteps || st.step() != ode::StepStatus::Accepted) {
          throw std::runtime_error("trace_stable_manifold: planar continuation failed");
        }
        const auto& seg = st.last();
        if (seg.y1[1] <= 0.0) {
          const double s_cross = ode::locate_crossing([&](double s) { return seg(s)[1]; }, seg.t0,
                                                      seg.t1(), opts.crossing_tol);
          const double u_bar = seg(s_cross)[0];
          if (u_bar <= tr.u_max) {
            out.push(u_bar, 0.0);
            tr.crossing = u_bar;
            tr.x_bar = u_bar + x1;
          } else {
            const double s_end = ode::locate_crossing(
                [&](double s) { return seg(s)[0] - tr.u_max; }, seg.t0, s_cross, opts.crossing_tol);
            out.push(tr.u_max, seg(s_end)[1]);
          }
          return tr;
        }
        if (seg.y1[0] >= tr.u_max) {
          const double s_end = ode::locate_crossing([&](double s) { return seg(s)[0] - tr.u_max; },
                                                    seg.t0, seg.t1(), opts.crossing_tol);
          out.push(tr.u_max, seg(s_end)[1]);
          return tr;
        }
        u = seg.y1[0];
        v = seg.y1[1];
        out.push(u, v);
        // Hand over to the graph form once Phi is well away from zero and
        // still rising; a descending branch stays planar until it lands.
        if (v >= 2.0 * opts.switch_level && st.dydt()[1] > 0.0) {
          planar_mode = false;
          break;
        }
      }
    } else {
      auto st = ode::make_stepper<1>(graph, u, {v}, so);
      while (true) {
        if (++steps > kMaxSteps ||
            st.step(tr.u_max - st.t()) != ode::StepStatus::Accepted) {
          throw std::runtime_error("trace_stable_manifold: graph continuation failed");
        }
        u = st.t();
        v = st.y()[0];
        out.push(u, v);
        if (u >= tr.u_max) return tr;
        if (v < opts.switch_level) {
          planar_mode = true;
          break;
        }
      }
    }
  }
  return tr;
}

/// x_bar(alpha) for the given parameters, or nullopt when the branch does not
/// return to the axis before u_max.
inline std::optional<double> crossing_x_bar(const Params& p, const TraceOptions& opts = {}) {
  return trace_stable_manifold(p, opts).x_bar;
}

/// Phi(u) >= alpha u - 1e-9 on every traced sample with u <= x2 - x1.
inline bool lemma1_bound_check(const Params& p, const TraceOptions& opts = {}) {
  if (!(p.alpha > 0.0)) throw std::invalid_argument("lemma1_bound_check: alpha must be positive");
  const auto tr = trace_stable_manifold(p, opts);
  const double width = tr.x2 - tr.x1;
  for (std::size_t i = 0; i < tr.u_samples.size(); ++i) {
    const double u = tr.u_samples[i];
    if (u > width) break;
    if (tr.phi_samples[i] < p.alpha * u - 1e-9) return false;
  }
  return true;
}

struct MonotonicityReport {
  std::vector<ManifoldTrace> traces;
  double min_gap = std::numeric_limits<double>::infinity();  // min Phi_{k+1} - Phi_k over compared points
  bool ordered = true;
  bool crossings_increasing = true;
  bool holds() const noexcept { return ordered && crossings_increasing; }
};

/// Compares consecutive traces of a strictly increasing alpha grid on their
/// common u-range (the samples of both traces beyond the seed) and checks the
/// crossings u_bar(alpha) increase where defined.
inline MonotonicityReport monotonicity_report(double lambda, const std::vector<double>& alphas,
                                              const TraceOptions& opts = {}) {
  if (alphas.size() < 2) throw std::invalid_argument("monotonicity_check: need two or more alphas");
  for (std::size_t i = 1; i < alphas.size(); ++i) {
    if (!(alphas[i] > alphas[i - 1])) {
      throw std::invalid_argument("monotonicity_check: alphas must be strictly increasing");
    }
  }
  MonotonicityReport rep;
  for (double a : alphas) rep.traces.push_back(trace_stable_manifold({lambda, a}, opts));

  for (std::size_t k = 0; k + 1 < rep.traces.size(); ++k) {
    const auto& lo = rep.traces[k];
    const auto& hi = rep.traces[k + 1];
    const double common = std::min(lo.u_end(), hi.u_end());
    const double start = std::max(lo.seed, hi.seed);
    auto compare = [&](const std::vector<double>& us) {
      for (double u : us) {
        if (u < start || u > common) continue;
        const double gap = hi.at(u) - lo.at(u);
        rep.min_gap = std::min(rep.min_gap, gap);
        if (!(gap > 0.0)) rep.ordered = false;
      }
    };
    compare(lo.u_samples);
    compare(hi.u_samples);
  }
  std::optional<double> prev;
  for (const auto& tr : rep.traces) {
    if (!tr.crossing) continue;
    if (prev && !(*tr.crossing > *prev)) rep.crossings_increasing = false;
    prev = tr.crossing;
  }
  return rep;
}

inline bool monotonicity_check(double lambda, const std::vector<double>& alphas,
                               const TraceOptions& opts = {}) {
  return monotonicity_report(lambda, alphas, opts).holds();
}

}  // namespace mems
