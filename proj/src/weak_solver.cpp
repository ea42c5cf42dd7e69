#include "wke/weak_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wke/summation.hpp"

namespace wke {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::pair<double, double> mode_weights(const WeakRunConfig& cfg) {
  switch (cfg.mode) {
    case InteractionMode::interacting:
      return {1.0, 1.0};
    case InteractionMode::noninteracting:
      return {0.0, 0.0};
    case InteractionMode::general:
      return {cfg.alpha, cfg.beta};
  }
  return {1.0, 1.0};
}

void remap_onto_nodes(const std::vector<double>& pos, std::vector<double>& m,
                      double x, double mass) {
  auto it = std::upper_bound(pos.begin(), pos.end(), x);
  if (it == pos.begin()) {
    m[0] += mass;
    return;
  }
  if (it == pos.end()) {
    m.back() += mass;  // data beyond the last node is pinned there
    return;
  }
  std::size_t r = (std::size_t)(it - pos.begin());
  std::size_t l = r - 1;
  double lam = (pos[r] - x) / (pos[r] - pos[l]);
  m[l] += lam * mass;
  m[r] += (1.0 - lam) * mass;
}

struct Discretization {
  CollisionEngine engine;
  std::vector<double> m0;
};

Discretization discretize(const Measure& g_in, const WeakRunConfig& cfg,
                          double sigma) {
  auto [alpha, beta] = mode_weights(cfg);
  EngineParams par;
  par.sigma = sigma;
  par.alpha = alpha;
  par.beta = beta;
  par.omega_cap = cfg.omega_cap;
  par.activity_floor = cfg.activity_floor;

  if (cfg.n_cells <= 0) {
    if (g_in.has_density())
      throw std::invalid_argument(
          "weak_solver: atom collocation needs purely atomic data; set "
          "n_cells for diffuse input");
    par.mode = DepositMode::exact;
    std::vector<double> ppos;
    for (const auto& [x, mm] : g_in.atoms) {
      (void)mm;
      if (x > cfg.omega_cap)
        throw std::invalid_argument("weak_solver: atom beyond omega_cap");
      ppos.push_back(x);
    }
    CollisionEngine eng(close_support(ppos, cfg.omega_cap, cfg.max_support),
                        par);
    std::vector<double> m(eng.size(), 0.0);
    m[0] = g_in.condensate;
    const auto& pos = eng.positions();
    for (const auto& [x, mm] : g_in.atoms) {
      auto it = std::lower_bound(pos.begin(), pos.end(), x - 1e-9);
      std::size_t idx = (std::size_t)(it - pos.begin());
      if (idx >= pos.size() || std::abs(pos[idx] - x) > 1e-9 * std::max(1.0, x))
        throw std::logic_error("weak_solver: closed support lost an atom");
      m[idx] += mm;
    }
    return {std::move(eng), std::move(m)};
  }

  par.mode = DepositMode::remap;
  const int n = cfg.n_cells;
  const double h = cfg.omega_cap / n;
  std::vector<double> nodes(n);
  for (int j = 1; j <= n; ++j) nodes[(std::size_t)j - 1] = j * h;
  CollisionEngine eng(std::move(nodes), par);
  std::vector<double> m(eng.size(), 0.0);
  m[0] = g_in.condensate;
  const auto& pos = eng.positions();
  for (const auto& [x, mm] : g_in.atoms) remap_onto_nodes(pos, m, x, mm);
  for (std::size_t c = 0; c < g_in.density_values.size(); ++c) {
    double lo = g_in.density_edges[c], hi = g_in.density_edges[c + 1];
    double v = g_in.density_values[c];
    if (v == 0.0) continue;
    const int sub = 8;  // subcell remap keeps mass and energy exact
    double dx = (hi - lo) / sub;
    for (int s = 0; s < sub; ++s)
      remap_onto_nodes(pos, m, lo + (s + 0.5) * dx, v * dx);
  }
  return {std::move(eng), std::move(m)};
}

Measure measure_from_state(const CollisionEngine& eng,
                           const std::vector<double>& y) {
  Measure mu;
  const auto& pos = eng.positions();
  mu.condensate = y[0];
  for (std::size_t i = 1; i < pos.size(); ++i)
    if (y[i] != 0.0) mu.atoms.emplace_back(pos[i], y[i]);
  return mu;
}

double mass_median(const Measure& mu) {
  double mpos = mu.total_mass() - mu.condensate;
  if (mpos <= 0.0) return 0.0;
  double run = 0.0;
  for (const auto& [x, m] : mu.atoms) {
    run += m;
    if (run >= 0.5 * mpos) return x;
  }
  return mu.atoms.empty() ? 0.0 : mu.atoms.back().first;
}

double energy_median(const Measure& mu) {
  double etot = mu.total_energy();
  if (etot <= 0.0) return 0.0;
  double run = 0.0;
  for (const auto& [x, m] : mu.atoms) {
    run += x * m;
    if (run >= 0.5 * etot) return x;
  }
  return mu.atoms.empty() ? 0.0 : mu.atoms.back().first;
}

// smallest eta such that the window (Omega(1-eta), Omega(1+eta)) captures a
// (1-eta) fraction of the off-origin mass
double eta_fit(const Measure& mu, double omega) {
  double mpos = mu.total_mass() - mu.condensate;
  if (mpos <= 0.0 || omega <= 0.0) return 1.0;
  auto excess = [&](double eta) {
    return mu.mass_in(omega * (1.0 - eta), omega * (1.0 + eta)) -
           (1.0 - eta) * mpos;
  };
  if (excess(1.0) < 0.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 45; ++it) {
    double mid = 0.5 * (lo + hi);
    (excess(mid) >= 0.0 ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

Measure weak_step(const Measure& mu, const WeakRunConfig& cfg, double sigma,
                  double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("weak_step: dt must be > 0");
  auto disc = discretize(mu, cfg, sigma);
  const std::size_t n = disc.engine.size();
  std::vector<double> y = disc.m0;
  y.resize(n + 2, 0.0);
  OdeOpts one;
  one.rel_tol = 1e30;  // single forced step of the given size
  one.h_init = one.h_max = dt;
  one.h_min = dt;
  one.positivity = true;
  auto rhs = [&disc](double, const std::vector<double>& yy,
                     std::vector<double>& dy) { disc.engine.rhs(yy, dy); };
  ode_integrate(rhs, y, 0.0, dt, one);
  double m_before = mu.total_mass();
  double m_after = 0.0;
  for (std::size_t i = 0; i < n; ++i) m_after += y[i];
  m_after += y[n];  // leak
  if (std::abs(m_after - m_before) >
      10.0 * 1e-6 * std::max(m_before, 1e-300) * std::max(dt, 1.0))
    throw std::runtime_error("weak_step: mass balance violated");
  return measure_from_state(disc.engine, y);
}

WeakRunReport run_weak(const Measure& g_in, const WeakRunConfig& cfg,
                       double sigma) {
  WeakRunReport rep;
  auto disc = discretize(g_in, cfg, sigma);
  const std::size_t n = disc.engine.size();
  std::vector<double> y = disc.m0;
  y.resize(n + 2, 0.0);

  Accum m0a, e0a;
  for (std::size_t i = 0; i < n; ++i) {
    m0a.add(y[i]);
    e0a.add(disc.engine.positions()[i] * y[i]);
  }
  const double M0 = m0a.value(), E0 = e0a.value();

  OdeOpts opts = cfg.ode;
  opts.positivity = true;
  auto rhs = [&disc](double, const std::vector<double>& yy,
                     std::vector<double>& dy) { disc.engine.rhs(yy, dy); };

  double t = 0.0;
  auto record = [&](double tt) {
    Measure mu = measure_from_state(disc.engine, y);
    rep.snapshots.emplace_back(tt, mu);
    WeakSample s;
    s.t = tt;
    s.mass = mu.total_mass();
    s.energy = mu.total_energy();
    s.condensate_mass = mu.condensate;
    s.omega_center = mass_median(mu);
    s.eta_spread = eta_fit(mu, s.omega_center);
    s.front_radius = energy_median(mu);
    s.dist_to_dirac = kNaN;  // filled below once R* is known
    rep.series.push_back(s);
  };
  record(0.0);

  const double dt_chunk =
      cfg.snapshot_dt > 0.0 ? cfg.snapshot_dt : cfg.horizon;
  while (t < cfg.horizon * (1.0 - 1e-12)) {
    double t_next = std::min(t + dt_chunk, cfg.horizon);
    OdeStatus st = ode_integrate(rhs, y, t, t_next, opts);
    rep.ode_status.steps += st.steps;
    rep.ode_status.rejects += st.rejects;
    rep.ode_status.rhs_evals += st.rhs_evals;
    rep.ode_status.h_last = st.h_last;
    rep.ode_status.ok = rep.ode_status.ok && st.ok;
    t = t_next;
    record(t);
  }

  rep.final_state = measure_from_state(disc.engine, y);
  rep.leak_mass = y[n];
  rep.leak_energy = y[n + 1];
  double m_end = rep.final_state.total_mass() + rep.leak_mass;
  double e_end = rep.final_state.total_energy() + rep.leak_energy;
  rep.mass_drift = std::abs(m_end - M0) / std::max(M0, 1e-300);
  rep.energy_drift = std::abs(e_end - E0) / std::max(E0, 1e-300);
  if (rep.mass_drift > 1e-3)
    throw std::runtime_error("run_weak: mass ledger broken");

  auto diag = asymptotics_diagnostics(rep.snapshots, cfg.omega_cap);
  rep.r_star = diag.r_star;
  rep.r_star_dense = diag.dense;
  rep.verdict = diag.verdict;
  for (std::size_t s = 0; s < rep.series.size(); ++s)
    rep.series[s].dist_to_dirac =
        s < diag.dist_to_dirac.size() ? diag.dist_to_dirac[s] : kNaN;
  return rep;
}

WeakRunReport sigma_continuation(const Measure& g_in,
                                 const WeakRunConfig& cfg) {
  const auto& sig = cfg.sigma_schedule;
  if (sig.empty())
    throw std::invalid_argument("sigma_continuation: empty schedule");
  for (std::size_t k = 0; k < sig.size(); ++k) {
    if (sig[k] < 0.0 || (k > 0 && sig[k] >= sig[k - 1]))
      throw std::invalid_argument(
          "sigma_continuation: schedule must be strictly decreasing and "
          "nonnegative");
  }
  WeakRunReport last;
  Measure prev_final;
  std::vector<double> dists;
  for (std::size_t k = 0; k < sig.size(); ++k) {
    last = run_weak(g_in, cfg, sig[k]);
    if (k > 0) {
      WeakDistOpts wd;
      wd.omega_cap = cfg.omega_cap;
      dists.push_back(weak_distance(last.final_state, prev_final, wd));
    }
    prev_final = last.final_state;
  }
  last.sigma_distances = dists;
  last.cauchy_ok = true;
  for (std::size_t k = 1; k < dists.size(); ++k)
    if (dists[k] > dists[k - 1] * 1.2 + 1e-9) last.cauchy_ok = false;
  return last;
}

bool tightness_check(const Trajectory& traj, double R, double eta) {
  if (traj.empty() || !(eta > 0.0) || !(eta < 1.0) || !(R > 0.0))
    return false;
  const double L = R / eta;
  const double base = (1.0 - eta) * traj.front().second.mass_in(0.0, R);
  const double slack = 1e-10 * std::max(1.0, traj.front().second.total_mass());
  for (const auto& [t, mu] : traj) {
    (void)t;
    if (mu.mass_in(0.0, L) < base - slack) return false;
  }
  return true;
}

MonotoneReport monotone_functional_check(const Trajectory& traj,
                                         const std::vector<TestFn>& catalog,
                                         double tol_rel) {
  MonotoneReport rep;
  if (traj.size() < 2) return rep;
  for (const auto& fn : catalog) {
    std::vector<double> v;
    v.reserve(traj.size());
    double scale = 0.0;
    for (const auto& [t, mu] : traj) {
      (void)t;
      v.push_back(mu.pair_with(fn.f));
      scale = std::max(scale, std::abs(v.back()));
    }
    if (scale == 0.0) continue;
    double worst = 0.0;
    for (std::size_t s = 1; s < v.size(); ++s) {
      double d = v[s] - v[s - 1];
      double viol;
      if (fn.affine)
        viol = -std::abs(v[s] - v.front());
      else if (fn.convexity > 0)
        viol = d;
      else if (fn.convexity < 0)
        viol = -d;
      else
        continue;
      worst = std::min(worst, viol / scale);
    }
    if (worst < rep.worst) {
      rep.worst = worst;
      rep.worst_name = fn.name;
    }
  }
  rep.ok = rep.worst >= -tol_rel;
  return rep;
}

AsymptoticsReport asymptotics_diagnostics(const Trajectory& traj,
                                          double omega_cap) {
  AsymptoticsReport rep;
  if (traj.empty()) {
    rep.verdict = "inconclusive";
    return rep;
  }
  const Measure& g0 = traj.front().second;
  std::vector<double> ppos;
  for (const auto& [x, m] : g0.atoms) {
    (void)m;
    ppos.push_back(x);
  }
  auto closure = extended_support(ppos, omega_cap);
  rep.r_star = closure.r_star;
  rep.dense = closure.dense;

  const double M0 = g0.total_mass();
  WeakDistOpts wd;
  wd.omega_cap = omega_cap;
  for (const auto& [t, mu] : traj) {
    rep.t.push_back(t);
    if (!rep.dense && rep.r_star > 0.0 &&
        std::isfinite(rep.r_star))
      rep.dist_to_dirac.push_back(
          weak_distance(mu, dirac(rep.r_star, mu.total_mass()), wd));
    else
      rep.dist_to_dirac.push_back(kNaN);
    double om = mass_median(mu);
    rep.omega_center.push_back(om);
    rep.eta_spread.push_back(eta_fit(mu, om));
  }

  // alternative (i): condensate mass above the floor, sustained for a tenth
  // of the horizon
  const double horizon = traj.back().first - traj.front().first;
  const double floor = 1e-6 * std::max(M0, 1e-300);
  const double need = 0.1 * horizon;
  double t_on = kNaN;
  bool sustained = false;
  for (const auto& [t, mu] : traj) {
    if (mu.condensate > floor) {
      if (std::isnan(t_on)) t_on = t;
      if (t - t_on >= need - 1e-12) {
        sustained = true;
        break;
      }
    } else {
      t_on = kNaN;
    }
  }
  if (sustained) {
    rep.verdict = "condensate";
    return rep;
  }
  // alternative (ii): the trailing half concentrates in a narrow window
  double eta_sum = 0.0;
  std::size_t cnt = 0;
  for (std::size_t s = traj.size() / 2; s < traj.size(); ++s) {
    eta_sum += rep.eta_spread[s];
    ++cnt;
  }
  rep.verdict =
      (cnt > 0 && eta_sum / (double)cnt < 0.5) ? "pulsating" : "inconclusive";
  return rep;
}

EnergyFrontReport energy_front(const Trajectory& traj,
                               const std::vector<double>& R_list) {
  EnergyFrontReport rep;
  for (const auto& [t, mu] : traj) {
    rep.t.push_back(t);
    rep.radius.push_back(energy_median(mu));
  }
  // least squares radius^2 = slope*t + r0sq
  const std::size_t n = rep.t.size();
  if (n >= 2) {
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t s = 0; s < n; ++s) {
      double yv = rep.radius[s] * rep.radius[s];
      st += rep.t[s];
      sy += yv;
      stt += rep.t[s] * rep.t[s];
      sty += rep.t[s] * yv;
    }
    double den = n * stt - st * st;
    if (den > 0.0) {
      rep.slope_fit = (n * sty - st * sy) / den;
      rep.r0sq_fit = (sy - rep.slope_fit * st) / n;
    } else {
      rep.slope_fit = 0.0;
      rep.r0sq_fit = sy / n;
    }
    double ymax = 0.0, emax = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      double yv = rep.radius[s] * rep.radius[s];
      ymax = std::max(ymax, std::abs(yv));
      emax = std::max(emax,
                      std::abs(yv - (rep.slope_fit * rep.t[s] + rep.r0sq_fit)));
    }
    rep.fit_rel_err = ymax > 0.0 ? emax / ymax : 0.0;
  }

  for (double R : R_list) {
    TestFn phi = ramp_bump_fn(R);
    std::vector<double> v;
    for (const auto& [t, mu] : traj) {
      (void)t;
      v.push_back(mu.pair_with(phi.f));
    }
    double target = 0.5 * v.front();
    double T = kNaN;
    for (std::size_t s = 1; s < v.size(); ++s) {
      if (v[s] <= target && v[s - 1] > target) {
        double frac = (v[s - 1] - target) / (v[s - 1] - v[s]);
        T = rep.t[s - 1] + frac * (rep.t[s] - rep.t[s - 1]);
        break;
      }
    }
    rep.halving.emplace_back(R, T);
  }
  return rep;
}

OffdiagReport offdiagonal_mass_diagnostic(const Trajectory& traj,
                                          const std::vector<double>& R_list,
                                          double rho) {
  OffdiagReport rep;
  if (!(rho > 0.0) || !(rho < 1.0) || traj.size() < 2 || R_list.empty())
    return rep;
  auto instant = [&](const Measure& mu, double R) {
    std::vector<std::pair<double, double>> at;
    if (mu.condensate > 0.0) at.emplace_back(0.0, mu.condensate);
    for (const auto& [x, m] : mu.atoms)
      if (x <= R) at.emplace_back(x, m);
    double s = 0.0;
    for (const auto& [x1, m1] : at)
      for (const auto& [x2, m2] : at)
        for (const auto& [x3, m3] : at) {
          double hi = std::max({x1, x2, x3});
          double lo = std::min({x1, x2, x3});
          double mid = x1 + x2 + x3 - hi - lo;
          if (mid - lo > rho * mid) s += m1 * m2 * m3;
        }
    return s;
  };
  for (double R : R_list) {
    double acc = 0.0;
    for (std::size_t s = 1; s < traj.size(); ++s) {
      double dt = traj[s].first - traj[s - 1].first;
      acc += 0.5 * dt *
             (instant(traj[s - 1].second, R) + instant(traj[s].second, R));
    }
    rep.sweep.emplace_back(R, acc);
  }
  rep.value = rep.sweep.back().second;
  double num = 0.0, den = 0.0;
  for (const auto& [R, v] : rep.sweep) {
    num += R * v;
    den += R * R;
  }
  rep.fitted_B = den > 0.0 ? num / den : 0.0;
  double vmax = 0.0;
  for (const auto& [R, v] : rep.sweep) vmax = std::max(vmax, std::abs(v));
  for (const auto& [R, v] : rep.sweep)
    if (std::abs(v - rep.fitted_B * R) >
        0.5 * rep.fitted_B * R_list.back() + 1e-12 * vmax + 1e-300)
      rep.bounded_linear = false;
  return rep;
}

}  // namespace wke
