#pragma once

// Embedded Bogacki-Shampine 3(2) driver over plain vectors.  The right-hand
// sides in this project are expensive (nested quadratures or triple sums), so
// the FSAL property matters more than a higher-order tableau.

#include <cstddef>
#include <functional>
#include <vector>

namespace wke {

struct OdeOpts {
  double rel_tol = 1e-7;
  double abs_tol = 1e-12;
  double h_init = 1e-3;
  double h_min = 1e-12;
  double h_max = 1.0;
  // clip tiny negative components (roundoff) back to zero, compensating the
  // mass into the largest component so the total is untouched
  bool positivity = false;
  std::size_t max_steps = 2'000'000;
};

struct OdeStatus {
  bool ok = true;
  std::size_t steps = 0;
  std::size_t rejects = 0;
  std::size_t rhs_evals = 0;
  double h_last = 0.0;
};

using OdeRhs =
    std::function<void(double t, const std::vector<double>& y, std::vector<double>& dy)>;

// advance y from t0 to t1 in place; optional observer runs after every
// accepted step (and once at t0)
OdeStatus ode_integrate(
    const OdeRhs& rhs, std::vector<double>& y, double t0, double t1,
    const OdeOpts& opts = {},
    const std::function<void(double, const std::vector<double>&)>& observer = {});

}  // namespace wke
