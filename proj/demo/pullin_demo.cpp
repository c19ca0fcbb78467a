// Walks through the main computations for a few parameter values.

#include <cstdio>

#include "mems/dynamics.hpp"
#include "mems/manifold.hpp"
#include "mems/pullin.hpp"
#include "mems/steady.hpp"

int main() {
  using namespace mems;

  std::printf("static pull-in value 4/27 = %.15f\n", static_pullin());
  std::printf("undamped dynamic threshold = %.15f\n\n", lambda_d_conservative());

  for (double lambda : {0.10, 0.13, 0.14}) {
    const auto eq = equilibria(lambda);
    std::printf("lambda = %.3f: saddle x1 = %.6f, stable x2 = %.6f\n", lambda, eq.x1, eq.x2);
    for (double alpha : {0.0, 0.2, 0.5}) {
      const auto xb = crossing_x_bar({lambda, alpha});
      const auto out = classify({lambda, alpha});
      std::printf("  alpha = %.1f: separatrix crosses y = 0 at %s%.6f, orbit from rest: %s\n", alpha,
                  xb ? "" : "(none) ", xb ? *xb : 0.0, std::string(outcome_name(out)).c_str());
    }
  }

  std::printf("\nalpha*(lambda), separatrix method:\n");
  for (double lambda : {0.13, 0.14, 0.145, 0.147}) {
    const auto pt = alpha_star(lambda, ThresholdMethod::ManifoldCrossing);
    std::printf("  lambda = %.3f  alpha* = %.8f\n", lambda, pt.alpha_star);
  }

  std::printf("\nlambda_d*(alpha):\n");
  const auto curve = sweep_curve({0.0, 0.1, 0.3, 0.5, 1.0}, ThresholdMethod::ManifoldCrossing);
  for (const auto& p : curve.points) {
    std::printf("  alpha = %.2f  lambda_d* = %.10f%s\n", p.alpha, p.lambda_d,
                p.saturated ? "  (no touchdown below 4/27)" : "");
  }
  return 0;
}
