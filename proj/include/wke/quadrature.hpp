#pragma once
#include <functional>
#include <vector>

namespace wke {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  long evals = 0;
  bool converged = true;
};

struct QuadOpts {
  double rel_tol = 1e-9;
  double abs_tol = 1e-14;
  int max_intervals = 4000;
};

using Fn1 = std::function<double(double)>;

// Single (non-adaptive) Gauss-Kronrod 15 panel on [a,b].  Useful as a building
// block for fixed composite rules where the integrand is noisy (e.g. computed
// by an inner adaptive integral) and error chasing would never terminate.
double gk15_value(const Fn1& f, double a, double b);

// Adaptive Gauss-Kronrod 7/15 on [a,b].
QuadResult integrate(const Fn1& f, double a, double b, const QuadOpts& opts = {});

// Same, seeded with known kinks/jumps of f (entries outside (a,b) ignored).
QuadResult integrate_pts(const Fn1& f, double a, double b,
                         std::vector<double> pts, const QuadOpts& opts = {});

// \int_a^infty f dx for f ~ x^{-p} (p > 1) at infinity.  Power map x = a/t^q
// with q chosen from the decay hint so the transformed integrand is tame.
QuadResult integrate_tail(const Fn1& f, double a, double decay_p = 2.0,
                          const QuadOpts& opts = {});

// \int_0^b f dx where f ~ x^{-s} (0 <= s < 1) at the origin.  Substitution
// x = v^k removes the endpoint singularity.
QuadResult integrate_pow0(const Fn1& f, double b, double s,
                          const QuadOpts& opts = {});

}  // namespace wke
