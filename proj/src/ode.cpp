#include "wke/ode.hpp"

#include <algorithm>
#include <cmath>

namespace wke {

namespace {

void clip_negatives(std::vector<double>& y) {
  double deficit = 0.0;
  std::size_t big = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0.0) {
      deficit += y[i];
      y[i] = 0.0;
    }
    if (y[i] > y[big]) big = i;
  }
  if (deficit != 0.0 && y[big] > 0.0) y[big] += deficit;
}

}  // namespace

OdeStatus ode_integrate(
    const OdeRhs& rhs, std::vector<double>& y, double t0, double t1,
    const OdeOpts& opts,
    const std::function<void(double, const std::vector<double>&)>& observer) {
  OdeStatus st;
  const std::size_t n = y.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), ytmp(n), ynew(n);
  double t = t0;
  double h = std::min(opts.h_init, std::max(t1 - t0, opts.h_min));

  if (observer) observer(t, y);
  rhs(t, y, k1);  // FSAL seed
  ++st.rhs_evals;

  while (t < t1) {
    if (st.steps + st.rejects > opts.max_steps) {
      st.ok = false;
      return st;
    }
    h = std::min({h, opts.h_max, t1 - t});
    h = std::max(h, opts.h_min);

    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + 0.5 * h * k1[i];
    rhs(t + 0.5 * h, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + 0.75 * h * k2[i];
    rhs(t + 0.75 * h, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (2.0 * k1[i] + 3.0 * k2[i] + 4.0 * k3[i]) / 9.0;
    rhs(t + h, ynew, k4);
    st.rhs_evals += 3;

    // scaled RMS of the embedded 2nd-order error estimate
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double e = h * (-5.0 * k1[i] / 72.0 + k2[i] / 12.0 + k3[i] / 9.0 -
                      k4[i] / 8.0);
      double sc = opts.abs_tol +
                  opts.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (e / sc) * (e / sc);
    }
    err = n > 0 ? std::sqrt(err / (double)n) : 0.0;

    if (err <= 1.0 || h <= opts.h_min * (1.0 + 1e-12)) {
      t += h;
      y.swap(ynew);
      if (opts.positivity) {
        clip_negatives(y);
        rhs(t, y, k1);  // clipping invalidates FSAL
        ++st.rhs_evals;
      } else {
        k1.swap(k4);
      }
      ++st.steps;
      st.h_last = h;
      if (observer) observer(t, y);
    } else {
      ++st.rejects;
    }
    double grow = err > 0.0 ? 0.9 * std::pow(err, -1.0 / 3.0) : 5.0;
    h *= std::clamp(grow, 0.2, 5.0);
  }
  return st;
}

}  // namespace wke
