#include "wke/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wke/summation.hpp"

namespace wke {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

// deposit-form core shared by lattice_rhs and the integrator; a/da are
// 1-based up to n_slots, the leaks collect everything past the last slot
void rhs_core(long long n_slots, int frame_log2, const double* a, double* da,
              double& leak_m, double& leak_e) {
  std::vector<long long> act;
  act.reserve(64);
  for (long long n = 1; n <= n_slots; ++n)
    if (a[n] > 0.0) act.push_back(n);
  std::vector<double> sq((std::size_t)n_slots + 1);
  for (long long n = 1; n <= n_slots; ++n)
    sq[(std::size_t)n] = std::sqrt((double)n);
  const double frame = std::ldexp(1.0, -frame_log2);

  for (std::size_t ii = 0; ii < act.size(); ++ii) {
    const long long i = act[ii];
    const double ai = a[i];
    for (std::size_t jj = ii; jj < act.size(); ++jj) {
      const long long j = act[jj];
      const double mij = (i == j ? 1.0 : 2.0) * ai * a[j];
      const long long sum = i + j;
      for (const long long p : act) {
        if (p == i || p == j) continue;  // all four deposits cancel
        const long long t = sum - p;
        if (t < 1) continue;
        const long long mn = std::min(std::min(i, j), std::min(p, t));
        const double r =
            mij * a[p] * sq[(std::size_t)mn] /
            (sq[(std::size_t)i] * sq[(std::size_t)j] * sq[(std::size_t)p]);
        da[i] -= r;
        da[j] -= r;
        da[p] += r;
        if (t <= n_slots) {
          da[t] += r;
        } else {
          leak_m += r;
          leak_e += r * (double)t * frame;
        }
      }
    }
  }
}

}  // namespace

double dyadic_point_position(const DyadicPoint& p) {
  if (p.alpha < 0 || p.k < 1)
    throw std::invalid_argument("dyadic_point_position: bad indices");
  if (p.alpha == 0) return (double)p.k;
  return std::ldexp((double)(2 * p.k - 1), -p.alpha);
}

DyadicPoint slot_point(long long n, int frame_log2) {
  if (n < 1 || frame_log2 < 0)
    throw std::invalid_argument("slot_point: bad slot");
  int v = std::countr_zero((unsigned long long)n);
  if (v >= frame_log2) return {0, n >> frame_log2};
  long long odd = n >> v;
  return {frame_log2 - v, (odd + 1) / 2};
}

double LatticeState::position(long long n) const {
  return std::ldexp((double)n, -frame_log2);
}

double LatticeState::total_mass() const {
  Accum s;
  for (std::size_t n = 1; n < a.size(); ++n) s.add(a[n]);
  return s.value();
}

double LatticeState::total_energy() const {
  Accum s;
  for (std::size_t n = 1; n < a.size(); ++n)
    s.add(a[n] * position((long long)n));
  return s.value();
}

Measure LatticeState::to_measure() const {
  Measure g;
  for (std::size_t n = 1; n < a.size(); ++n)
    if (a[n] > 0.0) g.atoms.emplace_back(position((long long)n), a[n]);
  return g;
}

LatticeState project_to_lattice(const Measure& g, const LatticeParams& par,
                                double tol) {
  if (par.alpha_max < 0)
    throw std::invalid_argument("project_to_lattice: alpha_max < 0");
  if (g.condensate > 0.0)
    throw std::invalid_argument(
        "project_to_lattice: the origin is not a lattice point");
  if (g.has_density())
    throw std::invalid_argument("project_to_lattice: atomic input expected");
  const int A = par.alpha_max;
  const double scale = std::ldexp(1.0, A);
  const long long n_slots = (long long)std::floor(par.omega_cap * scale + tol);
  if (n_slots < 1)
    throw std::invalid_argument(
        "project_to_lattice: cap below the finest lattice point");
  LatticeState s;
  s.frame_log2 = A;
  s.a.assign((std::size_t)n_slots + 1, 0.0);
  for (const auto& [x, m] : g.atoms) {
    double y = x * scale;
    long long n = (long long)std::llround(y);
    if (n < 1 || std::abs(y - (double)n) > tol * scale)
      throw std::invalid_argument(
          "project_to_lattice: atom off the dyadic lattice");
    if (n > n_slots)
      throw std::invalid_argument("project_to_lattice: atom above omega_cap");
    s.a[(std::size_t)n] += m;
  }
  return s;
}

std::vector<Resonance> enumerate_resonances(const LatticeState& s) {
  std::vector<long long> act;
  for (long long n = 1; n <= s.slots(); ++n)
    if (s.a[(std::size_t)n] > 0.0) act.push_back(n);
  std::vector<Resonance> out;
  for (std::size_t ii = 0; ii < act.size(); ++ii) {
    for (std::size_t jj = ii; jj < act.size(); ++jj) {
      for (const long long p : act) {
        const long long i = act[ii], j = act[jj];
        const long long t = i + j - p;
        if (t < 1) continue;
        const long long mn = std::min(std::min(i, j), std::min(p, t));
        Resonance r;
        r.i = i;
        r.j = j;
        r.p = p;
        r.t = t;
        r.w = (i == j ? 1.0 : 2.0) * std::sqrt((double)mn) /
              std::sqrt((double)i * (double)j * (double)p);
        r.trivial = (p == i || p == j);
        out.push_back(r);
      }
    }
  }
  return out;
}

void lattice_rhs(const LatticeState& s, std::vector<double>& da, double& leak_m,
                 double& leak_e) {
  da.assign(s.a.size(), 0.0);
  leak_m = 0.0;
  leak_e = 0.0;
  rhs_core(s.slots(), s.frame_log2, s.a.data(), da.data(), leak_m, leak_e);
}

SlowPhase slow_phase_rhs(const SlowPhase& y) {
  const double s = y.a2 * y.a2 * (y.a1 + y.a3 / kSqrt3);
  const double half = 0.5 * s;
  return {half, -s, half};
}

SlowPhase slow_phase_model(double alpha1, double alpha2, double alpha3,
                           double tbar, const OdeOpts& opts) {
  if (alpha1 < 0.0 || alpha2 < 0.0 || alpha3 < 0.0)
    throw std::invalid_argument("slow_phase_model: negative mass");
  std::vector<double> y = {alpha1, alpha2, alpha3};
  auto rhs = [](double, const std::vector<double>& v, std::vector<double>& d) {
    SlowPhase r = slow_phase_rhs({v[0], v[1], v[2]});
    d[0] = r.a1;
    d[1] = r.a2;
    d[2] = r.a3;
  };
  if (tbar > 0.0) ode_integrate(rhs, y, 0.0, tbar, opts);
  return {y[0], y[1], y[2]};
}

double slow_phase_closed_form(double alpha1, double alpha2, double alpha3,
                              double tbar) {
  const double K = alpha2 * alpha2 * (kSqrt3 + 1.0) / (2.0 * kSqrt3);
  const double grow = (kSqrt3 * alpha1 + alpha3) / (kSqrt3 + 1.0);
  const double shift = (alpha3 - alpha1) / (kSqrt3 + 1.0);
  return grow * std::exp(K * tbar) - shift;
}

FamilyStats family_masses(const LatticeState& s) {
  const int A = s.frame_log2;
  FamilyStats fs;
  fs.m.assign((std::size_t)A + 2, 0.0);
  for (long long n = 1; n <= s.slots(); ++n) {
    if (s.a[(std::size_t)n] <= 0.0) continue;
    fs.m[(std::size_t)slot_point(n, A).alpha] += s.a[(std::size_t)n];
  }
  fs.M.assign(fs.m.size(), 0.0);
  fs.S.assign(fs.m.size(), 0.0);
  for (int g = A; g >= 0; --g) {
    fs.M[(std::size_t)g] = fs.M[(std::size_t)g + 1] + fs.m[(std::size_t)g];
    fs.S[(std::size_t)g] =
        fs.S[(std::size_t)g + 1] + fs.m[(std::size_t)g] * std::exp2(0.5 * g);
  }
  return fs;
}

bool family_growth_bound_check(const std::vector<LatticeState>& traj,
                               double tol_scale, std::string* why) {
  auto bound = [](const FamilyStats& fs, int g) {
    const double inv_x = std::ldexp(1.0, g);  // 1 / x_g(1)
    const double s = fs.S[(std::size_t)g + 1] + std::sqrt(inv_x);
    return 6.0 * fs.m[(std::size_t)g] * inv_x +
           6.0 * fs.M[(std::size_t)g + 1] * s * s;
  };
  for (std::size_t r = 0; r + 1 < traj.size(); ++r) {
    const double dt = traj[r + 1].t - traj[r].t;
    if (!(dt > 0.0)) continue;
    FamilyStats f0 = family_masses(traj[r]), f1 = family_masses(traj[r + 1]);
    for (int g = 0; g <= traj[r].frame_log2; ++g) {
      const double fd =
          (f1.m[(std::size_t)g] - f0.m[(std::size_t)g]) / dt;
      const double b = std::max(bound(f0, g), bound(f1, g));
      if (fd > b + tol_scale * std::max(1.0, b)) {
        if (why) {
          *why = "family " + std::to_string(g) + " grows at " +
                 std::to_string(fd) + " > bound " + std::to_string(b) +
                 " near t = " + std::to_string(traj[r].t);
        }
        return false;
      }
    }
  }
  return true;
}

double ScheduleConstants::C1(int g) const { return c1_scale * std::ldexp(1.0, -g); }
double ScheduleConstants::C2(int g) const { return c2_scale * std::ldexp(1.0, g); }

ScheduleConstants ScheduleConstants::desk() {
  ScheduleConstants c;
  c.B = 3.0;
  c.c1_scale = 0.01;
  c.c2_scale = 5.0;
  return c;
}

double window_time(double eps, double eta, int gamma,
                   const ScheduleConstants& c) {
  if (!(eps > 0.0) || !(eps < 1.0))
    throw std::invalid_argument("window_time: eps outside (0,1)");
  if (!(eta > 0.0) || !(eta < 1.0 / 3.0))
    throw std::invalid_argument("window_time: eta outside (0,1/3)");
  const double one = 1.0 - 2.0 * eta;
  const double den = 2.0 + 4.0 * eta - eps;
  const double bracket = one / eta - 2.0 * one / den +
                         std::log((1.0 - 3.0 * eta) * den / (eta * eps));
  const double c1 = c.C1(gamma);
  const double pref =
      c.c1_divides ? 1.0 / (c1 * 2.0 * one * one) : c1 / (2.0 * one * one);
  return pref * bracket;
}

double seeding_cap(int gamma, double eps_gamma, const ScheduleConstants& c) {
  return std::min({eps_gamma / c.B,
                   c.C2(gamma) * std::ldexp(eps_gamma, -gamma) / 24.0,
                   std::exp2(0.5 * gamma)});
}

EpsilonSchedule epsilon_schedule(int alpha_max, const std::vector<double>& eta,
                                 const ScheduleConstants& c) {
  if (alpha_max < 0 || eta.size() != (std::size_t)alpha_max + 1)
    throw std::invalid_argument("epsilon_schedule: eta size mismatch");
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (!(eta[i] > 0.0) || !(eta[i] < 1.0 / 3.0))
      throw std::invalid_argument("epsilon_schedule: eta outside (0,1/3)");
    if (i > 0 && eta[i] > eta[i - 1])
      throw std::invalid_argument("epsilon_schedule: eta must decrease");
  }
  EpsilonSchedule out;
  out.eps.assign((std::size_t)alpha_max + 1, 0.0);
  out.t.assign((std::size_t)alpha_max + 1,
               std::numeric_limits<double>::quiet_NaN());
  out.eps[0] = 0.5;  // provisional; the cap is increasing in eps_0
  out.t[0] = window_time(0.5, eta[0], 0, c);
  if (!(out.t[0] >= 0.0)) {
    out.feasible = false;
    out.note = "window time negative at family 0 (eta too close to 1/3)";
  }
  for (int al = 1; al <= alpha_max; ++al) {
    double cap = std::numeric_limits<double>::infinity();
    for (int g = 0; g < al; ++g) {
      if (!(out.eps[(std::size_t)g] > 0.0) || !(out.t[(std::size_t)g] >= 0.0))
        continue;
      const double q =
          std::min(seeding_cap(g, out.eps[(std::size_t)g], c), 0.5);
      const double grow =
          std::exp(4.0 * c.C2(al) * out.t[(std::size_t)g]);
      cap = std::min(cap, std::ldexp(q, -al) / (std::exp2(0.5 * al) * grow));
    }
    if (!(cap > 0.0) || !std::isfinite(cap)) {
      out.feasible = false;
      if (out.note.empty())
        out.note = "seeding cap vanishes at family " + std::to_string(al);
      out.eps[(std::size_t)al] = 0.0;
      continue;
    }
    out.eps[(std::size_t)al] = cap;
    out.t[(std::size_t)al] = window_time(cap, eta[(std::size_t)al], al, c);
    if (!(out.t[(std::size_t)al] >= 0.0)) {
      out.feasible = false;
      if (out.note.empty())
        out.note = "window time negative at family " + std::to_string(al);
    }
  }
  Accum rest;
  for (int al = 1; al <= alpha_max; ++al) rest.add(out.eps[(std::size_t)al]);
  out.eps[0] = 1.0 - rest.value();
  out.t[0] = window_time(out.eps[0], eta[0], 0, c);
  return out;
}

double rescaled_dirac_distance(const Measure& g) {
  const double m = g.total_mass();
  if (!(m > 0.0)) return 0.0;
  const Measure target = dirac(1.0, m);
  std::vector<double> cand;
  double xmin = std::numeric_limits<double>::infinity(), xmax = 0.0;
  for (const auto& [x, mm] : g.atoms) {
    if (mm < 1e-3 * m || !(x > 0.0)) continue;
    cand.push_back(1.0 / x);
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
  }
  if (cand.empty()) return weak_distance(g, target);
  // geometric sweep across the occupied range, then local refinement
  for (double a = 1.0 / xmax; a <= 1.0 / xmin * 1.0001; a *= std::exp2(0.25))
    cand.push_back(a);
  double best = std::numeric_limits<double>::infinity();
  double best_a = cand.front();
  for (double a : cand) {
    double d = weak_distance(g.scaled_positions(a), target);
    if (d < best) {
      best = d;
      best_a = a;
    }
  }
  for (int j = -2; j <= 2; ++j) {
    if (j == 0) continue;
    double a = best_a * std::exp2(j / 16.0);
    best = std::min(best, weak_distance(g.scaled_positions(a), target));
  }
  return best;
}

PulsatingReport pulsating_run(const std::vector<double>& eps,
                              const std::vector<double>& eta,
                              const LatticeParams& par, double horizon,
                              double snapshot_dt) {
  const int A = par.alpha_max;
  if (eps.size() != (std::size_t)A + 1 || eta.size() != eps.size())
    throw std::invalid_argument("pulsating_run: eps/eta size mismatch");
  if (!(horizon > 0.0) || !(snapshot_dt > 0.0))
    throw std::invalid_argument("pulsating_run: bad horizon");
  Measure init;
  for (int al = 0; al <= A; ++al) {
    if (eps[(std::size_t)al] < 0.0)
      throw std::invalid_argument("pulsating_run: negative eps");
    if (eps[(std::size_t)al] > 0.0)
      init.atoms.emplace_back(std::ldexp(1.0, -al), eps[(std::size_t)al]);
  }
  LatticeState s = project_to_lattice(init, par);
  const double m0 = s.total_mass();
  const double e0 = s.total_energy();
  if (!(m0 > 0.0)) throw std::invalid_argument("pulsating_run: zero mass");

  PulsatingReport rep;
  const std::size_t nsl = (std::size_t)s.slots();
  // ODE vector keeps the unused slot 0 so indices line up with LatticeState,
  // then two trailing ledger components for leaked mass and energy
  std::vector<double> y(s.a.begin(), s.a.end());
  y.push_back(0.0);
  y.push_back(0.0);
  auto rhs = [&](double, const std::vector<double>& v, std::vector<double>& d) {
    std::fill(d.begin(), d.end(), 0.0);
    rhs_core((long long)nsl, A, v.data(), d.data(), d[nsl + 1], d[nsl + 2]);
  };
  OdeOpts opts = par.ode;
  opts.positivity = true;
  opts.h_max = std::min(opts.h_max, snapshot_dt);

  auto snap = [&](double t) {
    LatticeState cur = s;
    cur.t = t;
    std::copy(y.begin(), y.begin() + (std::ptrdiff_t)nsl + 1, cur.a.begin());
    cur.leak_mass = y[nsl + 1];
    cur.leak_energy = y[nsl + 2];
    rep.snapshots.push_back(std::move(cur));
  };
  snap(0.0);
  double t = 0.0;
  while (t < horizon * (1.0 - 1e-12)) {
    double target = std::min(t + snapshot_dt, horizon);
    OdeStatus st = ode_integrate(rhs, y, t, target, opts);
    rep.ode_status.steps += st.steps;
    rep.ode_status.rejects += st.rejects;
    rep.ode_status.rhs_evals += st.rhs_evals;
    rep.ode_status.h_last = st.h_last;
    if (!st.ok) {
      rep.verdict = "integrator_failure";
      return rep;
    }
    t = target;
    snap(t);
  }

  const LatticeState& fin = rep.snapshots.back();
  rep.mass_drift =
      std::abs(fin.total_mass() + fin.leak_mass - m0) / std::max(m0, 1e-300);
  rep.energy_drift = std::abs(fin.total_energy() + fin.leak_energy - e0) /
                     std::max(e0, 1e-300);

  // per-family series of a_g(1) / initial mass and threshold windows
  for (int g = 0; g <= A; ++g) {
    const long long slot = 1LL << (A - g);
    const double thr = 1.0 - 4.0 * eta[(std::size_t)g];
    PulseWindow w;
    bool open = false;
    for (const auto& st : rep.snapshots) {
      const double frac = st.a[(std::size_t)slot] / m0;
      if (frac >= thr) {
        if (!open) {
          open = true;
          w = {g, st.t, st.t, frac};
        } else {
          w.t_hi = st.t;
          w.level = std::min(w.level, frac);
        }
      } else if (open) {
        if (w.t_hi > w.t_lo) rep.windows.push_back(w);
        open = false;
      }
    }
    if (open && w.t_hi > w.t_lo) rep.windows.push_back(w);
  }
  std::sort(rep.windows.begin(), rep.windows.end(),
            [](const PulseWindow& a, const PulseWindow& b) {
              return a.t_lo < b.t_lo;
            });

  const PulseWindow* plateau = nullptr;
  for (const auto& w : rep.windows)
    if (w.family == 0 && w.t_lo <= rep.snapshots.front().t + 1e-12) {
      plateau = &w;
      break;
    }
  rep.plateau0 = plateau != nullptr;
  const PulseWindow* arrival = nullptr;  // earliest family-1 window
  if (plateau) {
    for (const auto& w : rep.windows) {
      if (w.family == 1 && w.t_lo > plateau->t_hi) {
        if (!arrival) arrival = &w;
        rep.relocated = true;
        rep.relocation_level = std::max(rep.relocation_level, w.level);
      }
    }
  }
  if (plateau) {
    const double t_lo = plateau->t_hi;
    const double t_hi = arrival ? arrival->t_lo : horizon;
    for (const auto& st : rep.snapshots) {
      if (st.t <= t_lo || st.t >= t_hi) continue;
      rep.transition_distance =
          std::max(rep.transition_distance,
                   rescaled_dirac_distance(st.to_measure()));
    }
  }
  rep.verdict =
      !rep.plateau0 ? "no_plateau" : (!rep.relocated ? "no_relocation" : "ok");
  return rep;
}

}  // namespace wke
