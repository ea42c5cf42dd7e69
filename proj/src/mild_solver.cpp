#include "wke/mild_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wke/kernels.hpp"
#include "wke/quadrature.hpp"
#include "wke/summation.hpp"

namespace wke {

namespace {

constexpr double kTailStopFactor = 8.0;  // integration window beyond the cap

double tail_exponent(const MildParams& par) { return par.rho - 0.5; }

// Composite GK15 with fixed panels: splits at the supplied breakpoints, then
// refines dyadically toward both ends of every sub-interval (square-root kinks
// sit at the breakpoints, so the refinement soaks them up).  The collision
// integrand below is itself an inner adaptive integral and carries its noise
// floor; an adaptive outer rule chases that noise without ever converging,
// while this rule has deterministic cost and reaches ~1e-4 relative accuracy.
double fixed_panels(const Fn1& fn, double a, double b, std::vector<double> pts,
                    int octaves) {
  if (!(b > a)) return 0.0;
  pts.push_back(a);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  std::vector<double> knots;
  for (double p : pts) {
    if (p < a || p > b) continue;
    if (knots.empty() || p > knots.back()) knots.push_back(p);
  }
  Accum total;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double p = knots[i], q = knots[i + 1], len = q - p;
    double prev = p;
    for (int k = octaves; k >= 1; --k) {
      double e = p + len * std::ldexp(1.0, -k);
      total.add(gk15_value(fn, prev, e));
      prev = e;
    }
    for (int k = 2; k <= octaves; ++k) {
      double e = q - len * std::ldexp(1.0, -k);
      total.add(gk15_value(fn, prev, e));
      prev = e;
    }
    total.add(gk15_value(fn, prev, q));
  }
  return total.value();
}

}  // namespace

MildGrid make_grid(const MildParams& par) {
  if (par.n_cells < 2 || !(par.omega_min > 0.0) ||
      !(par.omega_cap > par.omega_min))
    throw std::invalid_argument("make_grid: bad grid parameters");
  MildGrid g;
  const int n = par.n_cells;
  const double r = std::pow(par.omega_cap / par.omega_min, 1.0 / n);
  g.edges.resize(n + 1);
  for (int i = 0; i <= n; ++i)
    g.edges[(std::size_t)i] = par.omega_min * std::pow(r, i);
  g.edges.back() = par.omega_cap;
  g.centers.resize(n);
  for (int i = 0; i < n; ++i)
    g.centers[(std::size_t)i] =
        std::sqrt(g.edges[(std::size_t)i] * g.edges[(std::size_t)i + 1]);
  return g;
}

double MildState::f_at(double w) const {
  const auto& c = grid.centers;
  if (w <= c.front()) return f.front();  // flat continuation to the origin
  const double stop = kTailStopFactor * par.omega_cap;
  if (w >= stop) return 0.0;
  if (w >= c.back())
    return f.back() * std::pow(w / c.back(), tail_exponent(par));
  auto it = std::upper_bound(c.begin(), c.end(), w);
  std::size_t r = (std::size_t)(it - c.begin());
  std::size_t l = r - 1;
  // linear in u = sqrt(omega): smooth through the 1/sqrt factors
  double ul = std::sqrt(c[l]), ur = std::sqrt(c[r]), u = std::sqrt(w);
  double lam = (ur - u) / (ur - ul);
  return lam * f[l] + (1.0 - lam) * f[r];
}

double MildState::mass() const {
  Accum a;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double lo = grid.edges[i], hi = grid.edges[i + 1];
    a.add(f[i] * (2.0 / 3.0) * (std::pow(hi, 1.5) - std::pow(lo, 1.5)));
  }
  return a.value();
}

double MildState::energy() const {
  Accum a;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double lo = grid.edges[i], hi = grid.edges[i + 1];
    a.add(f[i] * (2.0 / 5.0) * (std::pow(hi, 2.5) - std::pow(lo, 2.5)));
  }
  return a.value();
}

double MildState::sup_f() const {
  double s = 0.0;
  for (double v : f) s = std::max(s, v);
  return s;
}

double MildState::min_f() const {
  double s = f.empty() ? 0.0 : f.front();
  for (double v : f) s = std::min(s, v);
  return s;
}

Measure MildState::to_measure() const {
  Measure mu;
  mu.density_edges = grid.edges;
  mu.density_values.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    double lo = grid.edges[i], hi = grid.edges[i + 1];
    double cell_mass =
        f[i] * (2.0 / 3.0) * (std::pow(hi, 1.5) - std::pow(lo, 1.5));
    mu.density_values[i] = cell_mass / (hi - lo);
  }
  return mu;
}

MildState make_mild_state(const std::function<double(double)>& f_init,
                          const MildParams& par) {
  MildState s;
  s.par = par;
  s.grid = make_grid(par);
  s.f.resize(s.grid.centers.size());
  for (std::size_t i = 0; i < s.f.size(); ++i) {
    s.f[i] = f_init(s.grid.centers[i]);
    if (!(s.f[i] >= 0.0))
      throw std::invalid_argument("make_mild_state: negative or NaN data");
  }
  return s;
}

double a_sigma_density(const MildState& s, double w1) {
  if (!(w1 > 0.0)) throw std::invalid_argument("a_sigma_density: w1 <= 0");
  const double sg = s.par.sigma;
  const double stop = kTailStopFactor * s.par.omega_cap;
  const QuadOpts io{s.par.quad_rel, 1e-13, 40};

  auto outer = [&](double w3) {
    double f3 = s.f_at(w3);
    if (f3 == 0.0) return 0.0;
    double lo = std::max(0.0, w1 - w3);
    // cut where w2 would leave the truncation window as well: keeping the
    // domain symmetric under w3 <-> w4 is what lets the gain and loss sides
    // cancel on an equilibrium profile instead of leaving an O(1) corner term
    double hi = stop - std::max(0.0, w3 - w1);
    if (hi <= lo) return 0.0;
    auto inner = [&](double w4) {
      double w2 = w3 + w4 - w1;
      double k = phi_sigma(sg, w1, w2, w3, w4);
      if (k == 0.0) return 0.0;
      return k * (2.0 * s.f_at(w2) - s.f_at(w4));
    };
    std::vector<double> pts = {w1, w3, 2.0 * w1 - w3, w1 - w3 + sg, sg,
                               s.par.omega_cap};
    return f3 * integrate_pts(inner, lo, hi, pts, io).value;
  };
  double v = fixed_panels(outer, 0.0, stop,
                          {sg, w1, s.grid.centers.front(), s.par.omega_cap}, 5);
  if (!std::isfinite(v))
    throw std::runtime_error("a_sigma_density: non-finite integral");
  return v / std::sqrt(w1);
}

double o_sigma_density(const MildState& s, double w1) {
  if (!(w1 > 0.0)) throw std::invalid_argument("o_sigma_density: w1 <= 0");
  const double sg = s.par.sigma;
  const double stop = kTailStopFactor * s.par.omega_cap;
  const QuadOpts io{s.par.quad_rel, 1e-13, 40};

  auto outer = [&](double w3) {
    double f3 = s.f_at(w3);
    if (f3 == 0.0) return 0.0;
    double lo = std::max(0.0, w1 - w3);
    double hi = stop - std::max(0.0, w3 - w1);  // same window as the loss side
    if (hi <= lo) return 0.0;
    auto inner = [&](double w4) {
      double w2 = w3 + w4 - w1;
      double k = phi_sigma(sg, w1, w2, w3, w4);
      if (k == 0.0) return 0.0;
      return k * s.f_at(w2) * s.f_at(w4);
    };
    std::vector<double> pts = {w1, w3, 2.0 * w1 - w3, w1 - w3 + sg, sg,
                               s.par.omega_cap};
    return f3 * integrate_pts(inner, lo, hi, pts, io).value;
  };
  double v = fixed_panels(outer, 0.0, stop,
                          {sg, w1, s.grid.centers.front(), s.par.omega_cap}, 5);
  if (!std::isfinite(v))
    throw std::runtime_error("o_sigma_density: non-finite integral");
  return v;  // gain in the g-normalization
}

double a_sigma(const Measure& g, const MildParams& par, double w1) {
  if (par.sigma <= 0.0)
    throw std::invalid_argument("a_sigma: measure input needs sigma > 0");
  if (g.has_density())
    throw std::invalid_argument("a_sigma: purely atomic input expected");
  if (!(w1 > 0.0)) throw std::invalid_argument("a_sigma: w1 <= 0");
  Accum gain2, loss;
  for (const auto& [xj, mj] : g.atoms) {
    if (xj <= 0.0) continue;  // the origin never clears a positive gap
    for (const auto& [xk, mk] : g.atoms) {
      if (xk <= 0.0) continue;
      double mm = mj * mk / std::sqrt(xj * xk);
      double k1 = phi_sigma(par.sigma, w1, xj, xk, w1 + xj - xk);
      if (k1 != 0.0) gain2.add(2.0 * mm * k1);
      double k2 = phi_sigma(par.sigma, w1, xj + xk - w1, xj, xk);
      if (k2 != 0.0) loss.add(mm * k2);
    }
  }
  return (gain2.value() - loss.value()) / std::sqrt(w1);
}

Measure o_sigma(const Measure& g, const MildParams& par) {
  if (g.has_density())
    throw std::invalid_argument("o_sigma: purely atomic input expected");
  Measure out;
  for (const auto& [xj, mj] : g.atoms) {
    if (xj <= 0.0) continue;
    for (const auto& [xk, mk] : g.atoms) {
      if (xk <= 0.0) continue;
      for (const auto& [xl, ml] : g.atoms) {
        if (xl <= 0.0) continue;
        double t = xk + xl - xj;
        double k = phi_sigma(par.sigma, t, xj, xk, xl);
        if (k == 0.0) continue;
        double m = mj * mk * ml * k / std::sqrt(xj * xk * xl);
        if (t == 0.0)
          out.condensate += m;
        else
          out.atoms.emplace_back(t, m);
      }
    }
  }
  out.merge_atoms(1e-12);
  return out;
}

namespace {

void compute_ops(const MildState& s, std::vector<double>& A,
                 std::vector<double>& Og) {
  const std::size_t n = s.grid.centers.size();
  A.resize(n);
  Og.resize(n);
  parallel_for(n, (std::size_t)std::max(1, s.par.threads),
               [&](std::size_t i) {
                 A[i] = a_sigma_density(s, s.grid.centers[i]);
                 Og[i] = o_sigma_density(s, s.grid.centers[i]);
               });
}

void apply_exponential(MildState& s, const std::vector<double>& A,
                       const std::vector<double>& Og, double dt) {
  for (std::size_t i = 0; i < s.f.size(); ++i) {
    double of = Og[i] / std::sqrt(s.grid.centers[i]);
    double a = A[i];
    double fn;
    if (std::abs(a) * dt > 1e-8) {
      double decay = std::exp(-a * dt);
      fn = s.f[i] * decay + (of / a) * (-std::expm1(-a * dt));
    } else {
      fn = s.f[i] + (of - a * s.f[i]) * dt;
    }
    if (!std::isfinite(fn))
      throw std::runtime_error("mild step: NaN/Inf contamination");
    s.f[i] = std::max(fn, 0.0);
  }
  s.t += dt;
}

}  // namespace

MildState mild_step(const MildState& s, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("mild_step: dt <= 0");
  std::vector<double> A, Og;
  compute_ops(s, A, Og);
  MildState out = s;
  apply_exponential(out, A, Og, dt);
  return out;
}

MildRunResult run_mild(const std::function<double(double)>& f_init,
                       const MildParams& par, double horizon,
                       double snapshot_dt) {
  MildRunResult res;
  MildState s = make_mild_state(f_init, par);
  const double sup0 = std::max(s.sup_f(), 1e-300);
  // first-crossing times of successive decades above the initial sup norm;
  // shrinking decade intervals flag genuinely accelerating growth
  double t_dec[3] = {-1.0, -1.0, -1.0};

  auto record = [&]() {
    res.rows.push_back({s.t, s.mass(), s.energy(), s.sup_f(), s.min_f()});
  };
  record();

  double next_snap = snapshot_dt > 0.0 ? snapshot_dt : horizon;
  std::vector<double> A, Og;
  try {
    while (s.t < horizon * (1.0 - 1e-12)) {
      compute_ops(s, A, Og);
      double supA = 0.0;
      for (double a : A) supA = std::max(supA, a);
      double dt = par.dt_max;
      if (supA > 0.0) dt = std::min(dt, par.safety / supA);
      dt = std::min({dt, next_snap - s.t, horizon - s.t});
      if (dt < 1e-12 * horizon) {
        res.verdict = "error";
        res.error = "step-size underflow";
        res.final_state = s;
        return res;
      }
      apply_exponential(s, A, Og, dt);

      double sup = s.sup_f();
      for (int d = 0; d < 3; ++d)
        if (t_dec[d] < 0.0 && sup > sup0 * std::pow(10.0, d + 1))
          t_dec[d] = s.t;
      if (sup > par.blowup_factor * sup0 && t_dec[2] > 0.0 &&
          t_dec[1] > t_dec[0] &&
          (t_dec[2] - t_dec[1]) <= (t_dec[1] - t_dec[0])) {
        res.verdict = "blew_up";
        res.blowup_t = t_dec[2];
        record();
        res.final_state = s;
        return res;
      }
      if (s.t >= next_snap * (1.0 - 1e-12)) {
        record();
        next_snap += snapshot_dt > 0.0 ? snapshot_dt : horizon;
      }
    }
  } catch (const std::exception& e) {
    res.verdict = "error";
    res.error = e.what();
    res.final_state = s;
    return res;
  }
  if (res.rows.empty() || res.rows.back().t < s.t) record();
  res.final_state = s;
  res.verdict = "completed";
  return res;
}

}  // namespace wke
