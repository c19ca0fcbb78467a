#pragma once

// Vector field, potentials and energy of the electrostatic mass-spring model
//
//     x'' + alpha x' + x = -lambda / (1 + x)^2
//
// written as the planar system x' = y, y' = -(alpha y + f(x, lambda)).

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mems {

/// States closer than this to the pole x = -1 are rejected.
inline constexpr double kDomainGuard = 1e-13;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// (lambda, alpha): electrostatic load and damping (alpha = 1/gamma).
struct Params {
  double lambda = 0.0;
  double alpha = 0.0;
};

inline void validate(const Params& p) {
  if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) {
    throw std::invalid_argument("lambda must be a positive finite number");
  }
  if (!(p.alpha >= 0.0) || !std::isfinite(p.alpha)) {
    throw std::invalid_argument("alpha must be a nonnegative finite number");
  }
}

struct PhaseState {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
};

namespace detail {

inline bool in_domain(double x) noexcept { return x > -1.0 + kDomainGuard; }

inline void require_domain(double x, const char* what) {
  if (!in_domain(x)) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": x = " << x << " is at or beyond the touchdown pole x = -1";
    throw DomainError(os.str());
  }
}

// Unchecked kernels shared by the integrators.
inline double force_unchecked(double x, double lambda) noexcept {
  const double s = 1.0 + x;
  return x + lambda / (s * s);
}

inline double potential_unchecked(double x, double lambda) noexcept {
  return 0.5 * x * x - lambda / (1.0 + x);
}

}  // namespace detail

/// f(x, lambda) = x + lambda / (1+x)^2.
inline double force(double x, double lambda) {
  detail::require_domain(x, "force");
  return detail::force_unchecked(x, lambda);
}

/// g(x) = x (1+x)^2. Stationary points solve g(x) = -lambda.
inline double cubic_g(double x) noexcept {
  const double s = 1.0 + x;
  return x * s * s;
}

/// F(x, lambda) = x^2/2 - lambda/(1+x), a primitive of force().
inline double potential(double x, double lambda) {
  detail::require_domain(x, "potential");
  return detail::potential_unchecked(x, lambda);
}

/// E = y^2/2 + F(x, lambda). Nonincreasing along orbits when alpha >= 0.
inline double energy(const PhaseState& s, double lambda) {
  detail::require_domain(s.x, "energy");
  return 0.5 * s.y * s.y + detail::potential_unchecked(s.x, lambda);
}

/// df/dx = 1 - 2 lambda / (1+x)^3, strictly increasing in x.
inline double dforce_dx(double x, double lambda) {
  detail::require_domain(x, "dforce_dx");
  const double s = 1.0 + x;
  return 1.0 - 2.0 * lambda / (s * s * s);
}

/// df/dlambda = 1 / (1+x)^2 > 0.
inline double dforce_dlambda(double x) {
  detail::require_domain(x, "dforce_dlambda");
  const double s = 1.0 + x;
  return 1.0 / (s * s);
}

/// (x', y') = (y, -(alpha y + f(x, lambda))).
inline std::array<double, 2> vector_field(const PhaseState& s, const Params& p) {
  detail::require_domain(s.x, "vector_field");
  return {s.y, -(p.alpha * s.y + detail::force_unchecked(s.x, p.lambda))};
}

}  // namespace mems
