#include "wke/coagfrag.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "wke/fluxes.hpp"
#include "wke/quadrature.hpp"
#include "wke/summation.hpp"

namespace wke {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Piecewise-linear interpolant of H = G/sqrt(w) on the log grid, extended
// beyond either edge by the power law fitted to the outermost node pair.
// The fit is exact on the thermal family H = a/x, so a resolved dust tail
// keeps feeding the integrals below the floor instead of being chopped.
// Sub-floor evaluation caps the exponent at the thermal value 1: a steeper
// fit can only be a transient of the truncation itself, and extrapolating
// it feeds the bottom node back its own growth until the run aborts.
struct HProfile {
  const CoagGrid* grid;
  std::vector<double> H;
  double llo, inv_h;
  double q_floor = 0.0;  // H ~ x^{-q} fitted below lo (0 when edge empty)
  double q_eval = 0.0;   // exponent actually used below lo (<= 1)
  double p_ceil = 0.0;   // H ~ x^{-p} fitted above hi
  double p_eval = 0.0;   // exponent actually used above hi (kept integrable)
  double hmax = 0.0;
  double s_lo = 0.0, s_hi = 0.0;  // edges of the strictly positive support

  explicit HProfile(const CoagFragState& s) : grid(&s.grid) {
    const int n = grid->n;
    H.resize(n);
    for (int i = 0; i < n; ++i) {
      H[i] = s.G[i] / std::sqrt(grid->node[i]);
      hmax = std::max(hmax, H[i]);
      if (H[i] > 0.0) {
        if (s_lo == 0.0) s_lo = grid->node[i];
        s_hi = grid->node[i];
      }
    }
    llo = std::log(grid->lo);
    const double h = grid->step();
    inv_h = 1.0 / h;
    if (H[0] > 0.0 && H[1] > 0.0) q_floor = std::log(H[0] / H[1]) / h;
    if (H[n - 1] > 0.0 && H[n - 2] > 0.0)
      p_ceil = std::log(H[n - 2] / H[n - 1]) / h;
    q_eval = std::min(q_floor, 1.0);
    p_eval = std::max(p_ceil, 0.55);
  }

  double floor_value() const { return H.front(); }
  double ceil_value() const { return H.back(); }

  double operator()(double v) const {
    if (!(v > 0.0)) return 0.0;
    if (v < grid->lo)
      return H.front() == 0.0 ? 0.0
                              : H.front() * std::pow(grid->lo / v, q_eval);
    if (v > grid->hi)
      return H.back() == 0.0 ? 0.0
                             : H.back() * std::pow(grid->hi / v, p_eval);
    int i = static_cast<int>((std::log(v) - llo) * inv_h);
    i = std::max(0, std::min(grid->n - 2, i));
    const double xa = grid->node[i], xb = grid->node[i + 1];
    double t = (v - xa) / (xb - xa);
    t = std::max(0.0, std::min(1.0, t));
    return H[i] + t * (H[i + 1] - H[i]);
  }
};

void check_grid(const CoagGrid& g) {
  require(g.n >= 8, "coagfrag: grid needs at least 8 nodes");
  require(g.lo > 0.0 && g.hi > g.lo, "coagfrag: grid needs 0 < lo < hi");
  require(static_cast<int>(g.node.size()) == g.n,
          "coagfrag: grid nodes not materialized (use CoagGrid::make)");
}

void check_state(const CoagFragState& s) {
  check_grid(s.grid);
  require(static_cast<int>(s.G.size()) == s.grid.n,
          "coagfrag: profile size does not match the grid");
  for (double v : s.G)
    require(std::isfinite(v) && v >= 0.0,
            "coagfrag: profile values must be finite and nonnegative");
  require(s.M >= 0.0 && s.R > 0.0, "coagfrag: need M >= 0 and R > 0");
}

void check_floor_and_ceiling(const HProfile& prof, bool weak_form) {
  if (prof.floor_value() > 0.0 && prof.q_floor >= 2.0) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "coagfrag: combined integrand diverges at the grid floor "
                  "(H ~ x^-q with q = %.3f >= 2)",
                  prof.q_floor);
    throw std::runtime_error(msg);
  }
  const double need = weak_form ? 1.0 : 0.5;
  if (prof.ceil_value() > 0.0 && prof.p_ceil <= need) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  weak_form
                      ? "coagfrag: channel rates diverge separately for a "
                        "ceiling tail H ~ x^-p with p = %.3f <= 1"
                      : "coagfrag: ceiling tail too fat to integrate "
                        "(H ~ x^-p with p = %.3f <= 1/2)",
                  prof.p_ceil);
    throw std::runtime_error(msg);
  }
}

// Composite adaptive pass over ~e-wide log panels.  The exchange integrals
// span several decades, and a feature narrower than the node spacing of a
// single Gauss-Kronrod rule on the whole range slips straight through its
// error estimate; panelling pins the resolution to the decade scale first.
double integrate_log_panels(const std::function<double(double)>& f, double a,
                            double b, const std::vector<double>& pts,
                            const QuadOpts& opts) {
  if (!(b > a)) return 0.0;
  const double la = std::log(a), lb = std::log(b);
  const int np = std::max(1, static_cast<int>(std::ceil(lb - la)));
  const QuadOpts panel{opts.rel_tol, opts.abs_tol / np, opts.max_intervals};
  Accum acc;
  double left = a;
  for (int k = 1; k <= np; ++k) {
    const double right = (k == np) ? b : std::exp(la + (lb - la) * k / np);
    acc.add(integrate_pts(f, left, right, pts, panel).value);
    left = right;
  }
  return acc.value();
}

RhsPieces rhs_pieces_at(const HProfile& prof, const CoagGrid& grid, int i,
                        const CoagRhsOpts& opts) {
  const double w = grid.node[i];
  const double Hw = prof.H[i];
  QuadOpts qo{opts.rel_tol,
              opts.abs_floor * prof.hmax * prof.hmax * std::max(w, grid.lo),
              opts.max_intervals};
  RhsPieces out;

  // int_0^{w/2} H(x) [H(w-x) + H(w+x) - 2 H(w)] dx.  The bracket is a
  // second difference, so the x -> 0 end only diverges when H itself grows
  // at least like x^{-2} there (rejected up front).
  const auto f1 = [&](double x) {
    return prof(x) * (prof(w - x) + prof(w + x) - 2.0 * Hw);
  };
  const double upper1 = 0.5 * w;
  const double cut = std::min(grid.lo, upper1);
  double s_pow = 0.0;
  if (prof.floor_value() > 0.0) s_pow = std::max(0.0, prof.q_eval - 1.0);
  // Support edges and their mirror images mark every spot where one factor
  // of the integrands below can switch on; out-of-range points are dropped
  // by the quadrature, so they are passed unconditionally.
  const std::vector<double> marks{prof.s_lo,     prof.s_hi,     w - prof.s_lo,
                                  w - prof.s_hi, prof.s_lo - w, prof.s_hi - w};
  auto with = [&](std::initializer_list<double> extra) {
    std::vector<double> pts = marks;
    pts.insert(pts.end(), extra);
    return pts;
  };
  Accum a1;
  a1.add(integrate_pow0(f1, cut, s_pow, qo).value);
  if (cut < upper1)
    a1.add(integrate_pts(f1, cut, upper1, with({0.25 * w}), qo).value);
  out.second_diff = a1.value();

  // int_{w/2}^w H(x) [H(w+x) - 2 H(w)] dx: both endpoints regular.
  const auto f2 = [&](double x) { return prof(x) * (prof(w + x) - 2.0 * Hw); };
  out.one_sided = integrate_pts(f2, 0.5 * w, w, with({0.75 * w}), qo).value;

  // int_w^inf H(x) H(w+x) dx, with the fitted tail carried analytically.
  const auto f3 = [&](double x) { return prof(x) * prof(w + x); };
  const double xc = std::max(2.0 * w, grid.hi);
  Accum a3;
  a3.add(integrate_pts(f3, w, xc, with({grid.hi - w, grid.hi}), qo).value);
  if (prof.ceil_value() > 0.0)
    a3.add(integrate_tail(f3, xc, 2.0 * prof.p_eval, qo).value);
  out.far_tail = a3.value();
  return out;
}

// The edge guard rejects handed-in states whose floor or ceiling asymptote
// breaks the integrals.  It stays out of the stepping path: the evolving
// profile crosses steep two-node transients (a dust front filling the
// bottom of the grid) that are integrable but fool an exponent fit.
std::vector<double> rhs_impl(const CoagFragState& s, const CoagRhsOpts& opts,
                             bool guard) {
  HProfile prof(s);
  if (guard) check_floor_and_ceiling(prof, /*weak_form=*/false);
  std::vector<double> out(s.grid.n);
  // Independent per node; a deterministic parallel map would drop in here.
  for (int i = 0; i < s.grid.n; ++i)
    out[i] = rhs_pieces_at(prof, s.grid, i, opts).sum();
  return out;
}

}  // namespace

CoagGrid CoagGrid::make(double lo, double hi, int n) {
  CoagGrid g;
  g.lo = lo;
  g.hi = hi;
  g.n = n;
  require(n >= 8, "coagfrag: grid needs at least 8 nodes");
  require(lo > 0.0 && hi > lo, "coagfrag: grid needs 0 < lo < hi");
  g.node.resize(n);
  const double h = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) g.node[i] = lo * std::exp(h * i);
  g.node.front() = lo;
  g.node.back() = hi;
  return g;
}

double CoagGrid::step() const { return std::log(hi / lo) / (n - 1); }

double CoagFragState::moment(double p) const {
  check_state(*this);
  const double h = grid.step();
  Accum acc;
  for (int i = 0; i < grid.n; ++i) {
    const double f = std::pow(grid.node[i], p + 1.0) * G[i];
    acc.add((i == 0 || i == grid.n - 1) ? 0.5 * h * f : h * f);
  }
  return acc.value();
}

double front_radius(const CoagFragState& s) {
  check_state(s);
  const double h = s.grid.step();
  const int n = s.grid.n;
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i) f[i] = s.grid.node[i] * s.grid.node[i] * s.G[i];
  std::vector<double> cum(n, 0.0);
  for (int i = 1; i < n; ++i) cum[i] = cum[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
  const double total = cum[n - 1];
  require(total > 0.0, "coagfrag: front of an empty profile");
  const double half = 0.5 * total;
  int k = 1;
  while (k < n - 1 && cum[k] < half) ++k;
  const double cell = cum[k] - cum[k - 1];
  const double t = cell > 0.0 ? (half - cum[k - 1]) / cell : 0.5;
  const double u = std::log(s.grid.node[k - 1]) + t * h;
  return std::exp(u);
}

RhsPieces coagfrag_rhs_at(const CoagFragState& s, int i,
                          const CoagRhsOpts& opts) {
  check_state(s);
  require(i >= 0 && i < s.grid.n, "coagfrag: node index out of range");
  HProfile prof(s);
  check_floor_and_ceiling(prof, /*weak_form=*/false);
  return rhs_pieces_at(prof, s.grid, i, opts);
}

std::vector<double> coagfrag_rhs(const CoagFragState& s,
                                 const CoagRhsOpts& opts) {
  check_state(s);
  return rhs_impl(s, opts, /*guard=*/true);
}

WeakExchange coagfrag_weak(const CoagFragState& s,
                           const std::function<double(double)>& psi,
                           const CoagRhsOpts& opts) {
  check_state(s);
  HProfile prof(s);
  check_floor_and_ceiling(prof, /*weak_form=*/true);
  const double lo = s.grid.lo, hi = s.grid.hi;
  const double abs_tol =
      opts.abs_floor * prof.hmax * prof.hmax * std::max(1.0, hi);
  const QuadOpts inner{0.1 * opts.rel_tol, 0.1 * abs_tol, opts.max_intervals};
  const QuadOpts outer{opts.rel_tol, abs_tol, opts.max_intervals};
  const bool tail = prof.ceil_value() > 0.0;

  WeakExchange out;

  const std::vector<double> marks{prof.s_lo, prof.s_hi};

  const auto split_outer = [&](double b) {
    const double hb = prof(b);
    if (hb == 0.0) return 0.0;
    const auto f = [&](double c) {
      return prof(c) * (psi(b - c) + psi(c) - psi(b));
    };
    const std::vector<double> pts{0.5 * b,         prof.s_lo,
                                  prof.s_hi,       b - prof.s_lo,
                                  b - prof.s_hi};
    return hb * integrate_log_panels(f, lo, b, pts, inner);
  };
  Accum sp;
  sp.add(integrate_log_panels(split_outer, lo, hi, marks, outer));
  if (tail) sp.add(integrate_tail(split_outer, hi, prof.p_eval, outer).value);
  out.split = sp.value();

  const auto merge_outer = [&](double a) {
    const double ha = prof(a);
    if (ha == 0.0) return 0.0;
    const auto f = [&](double b) {
      return prof(b) * (psi(a + b) - psi(a) - psi(b));
    };
    Accum in;
    in.add(integrate_log_panels(f, lo, hi, {a, prof.s_lo, prof.s_hi}, inner));
    if (tail) in.add(integrate_tail(f, hi, prof.p_eval, inner).value);
    return ha * in.value();
  };
  Accum mg;
  mg.add(integrate_log_panels(merge_outer, lo, hi, marks, outer));
  if (tail) mg.add(integrate_tail(merge_outer, hi, prof.p_eval, outer).value);
  out.merge = 0.5 * mg.value();

  out.total = out.split + out.merge;
  return out;
}

std::vector<CoagFragState> run_coagfrag(const CoagFragState& init,
                                        const std::vector<double>& times,
                                        const CoagRunOpts& opts) {
  check_state(init);
  require(!times.empty(), "coagfrag: no output times requested");
  require(opts.dt0 > 0.0, "coagfrag: dt0 must be positive");
  for (size_t k = 0; k < times.size(); ++k) {
    const double prev = k == 0 ? init.tbar : times[k - 1];
    require(times[k] >= prev, "coagfrag: output times must be nondecreasing");
  }

  {
    HProfile prof(init);
    check_floor_and_ceiling(prof, /*weak_form=*/false);
  }

  CoagFragState cur = init;
  const int n = cur.grid.n;
  const double m1_target = init.moment(1.0);
  std::vector<CoagFragState> out;
  out.reserve(times.size());

  // Derivative of a stage vector; tiny negative stage values (RK ringing)
  // are evaluated as zero without touching the stage algebra itself.
  const auto deriv = [&](const std::vector<double>& g) {
    CoagFragState tmp = cur;
    tmp.G = g;
    for (double& v : tmp.G) v = std::max(v, 0.0);
    return rhs_impl(tmp, opts.rhs, /*guard=*/false);
  };

  std::vector<double> y(n), k1, k2, k3, k4;
  for (double target : times) {
    while (cur.tbar < target * (1.0 - 1e-14) - 1e-300) {
      double dt = opts.dt0 * (1.0 + cur.tbar);
      dt = std::min(dt, target - cur.tbar);

      k1 = deriv(cur.G);
      for (int i = 0; i < n; ++i) y[i] = cur.G[i] + 0.5 * dt * k1[i];
      k2 = deriv(y);
      for (int i = 0; i < n; ++i) y[i] = cur.G[i] + 0.5 * dt * k2[i];
      k3 = deriv(y);
      for (int i = 0; i < n; ++i) y[i] = cur.G[i] + dt * k3[i];
      k4 = deriv(y);
      for (int i = 0; i < n; ++i)
        y[i] = cur.G[i] +
               dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

      double gmax = 0.0;
      for (double v : y) gmax = std::max(gmax, v);
      for (double& v : y) {
        if (v < 0.0) {
          if (v < -opts.neg_tol * gmax)
            throw std::runtime_error(
                "coagfrag: step went unstable (profile undershoot beyond "
                "the ringing tolerance); reduce dt0");
          v = 0.0;
        }
      }
      if (opts.conserve_energy) {
        CoagFragState probe = cur;
        probe.G = y;
        const double m1 = probe.moment(1.0);
        if (m1 > 0.0) {
          const double c = m1_target / m1;
          for (double& v : y) v *= c;
        }
      }
      cur.G = y;
      cur.tbar += dt;
    }
    out.push_back(cur);
    out.back().tbar = target;  // absorb the last clip's roundoff
  }
  return out;
}

namespace {

// Linear-in-w interpolation of the raw profile, zero outside the grid.
double profile_at(const CoagFragState& s, double w) {
  if (!(w >= s.grid.lo) || !(w <= s.grid.hi)) return 0.0;
  const double u = (std::log(w) - std::log(s.grid.lo)) / s.grid.step();
  int i = static_cast<int>(u);
  i = std::max(0, std::min(s.grid.n - 2, i));
  const double xa = s.grid.node[i], xb = s.grid.node[i + 1];
  double t = (w - xa) / (xb - xa);
  t = std::max(0.0, std::min(1.0, t));
  return s.G[i] + t * (s.G[i + 1] - s.G[i]);
}

}  // namespace

CollapseReport selfsim_collapse(const std::vector<CoagFragState>& traj) {
  require(!traj.empty(), "coagfrag: collapse of an empty trajectory");
  for (const auto& s : traj) check_state(s);

  const CoagFragState& last = traj.back();
  const double lam_last = 1.0 + last.tbar;
  CollapseReport rep;
  rep.y_front = front_radius(last) / std::sqrt(lam_last);

  const double t_cut = last.tbar / 10.0;
  std::vector<const CoagFragState*> used;
  for (const auto& s : traj)
    if (s.tbar >= t_cut) used.push_back(&s);
  rep.profiles_used = static_cast<int>(used.size());

  double ylo = 0.25 * rep.y_front, yhi = 2.5 * rep.y_front;
  for (const CoagFragState* s : used) {
    const double rt = std::sqrt(1.0 + s->tbar);
    ylo = std::max(ylo, s->grid.lo / rt);
    yhi = std::min(yhi, s->grid.hi / rt);
  }
  require(yhi > ylo, "coagfrag: collapse window collapsed (grid too narrow)");

  const int ny = 64;
  rep.y.resize(ny);
  rep.phi_last.resize(ny);
  const double ry = std::log(yhi / ylo) / (ny - 1);
  const auto phi = [](const CoagFragState& s, double yv) {
    const double lam = 1.0 + s.tbar;
    return lam * profile_at(s, yv * std::sqrt(lam));
  };
  for (int k = 0; k < ny; ++k) {
    rep.y[k] = ylo * std::exp(ry * k);
    rep.phi_last[k] = phi(last, rep.y[k]);
    rep.scale = std::max(rep.scale, std::abs(rep.phi_last[k]));
  }
  for (const CoagFragState* s : used) {
    if (s == &last) continue;
    for (int k = 0; k < ny; ++k)
      rep.distance =
          std::max(rep.distance, std::abs(phi(*s, rep.y[k]) - rep.phi_last[k]));
  }
  rep.metric = rep.scale > 0.0 ? rep.distance / rep.scale : 0.0;

  // Log-log slope of the final profile well below the front, where the
  // dust tail should have equilibrated to ~ y^{-1/2}.  The window tops out
  // at a tenth of the front: above that the dust-to-bulk crossover bends
  // the profile and contaminates the fit.
  const int nf = 24;
  const double flo = 0.02 * rep.y_front, fhi = 0.10 * rep.y_front;
  const double rf = std::log(fhi / flo) / (nf - 1);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int k = 0; k < nf; ++k) {
    const double yv = flo * std::exp(rf * k);
    const double pv = phi(last, yv);
    if (pv <= 0.0) continue;
    const double X = std::log(yv), Y = std::log(pv);
    sx += X;
    sy += Y;
    sxx += X * X;
    sxy += X * Y;
    ++m;
  }
  rep.small_y_exponent =
      m >= 4 ? (m * sxy - sx * sy) / (m * sxx - sx * sx)
             : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

ScalingLaws infinite_mass_scalings(double rho) {
  require(std::isfinite(rho) && rho > 0.5 && rho < 2.0,
          "infinite_mass_scalings: no scaling regime outside 1/2 < rho < 2");
  ScalingLaws out;
  if (std::abs(rho - 1.0) < 1e-12) {
    out.R_exponent = 1.0;
    out.M_exponent = 0.0;
    out.log_critical = true;  // logarithmic corrections expected
  } else if (rho < 1.0) {
    const double d = 2.0 * rho - 1.0;
    out.R_exponent = 1.0 / d;
    out.M_exponent = (1.0 - rho) / d;
  } else {
    out.R_exponent = 1.0 / rho;  // finite particle number, M saturates
    out.M_exponent = 0.0;
  }
  return out;
}

SelfsimExponents ni_selfsim_exponents(double rho) {
  require(std::isfinite(rho) && rho > 0.5,
          "ni_selfsim_exponents: need rho > 1/2");
  const double d = 2.0 * rho - 1.0;
  SelfsimExponents out;
  out.alpha = rho / d;
  out.beta = 1.0 / d;
  out.identity_gap = 2.0 * out.alpha - out.beta - 1.0;
  out.collision_exponent = 1.0 - 3.0 * rho;
  return out;
}

double ni_collision_scaling(double rho, double lambda, double window_lo,
                            double window_hi, double omega, double rel_tol) {
  require(lambda > 1.0, "ni_collision_scaling: need lambda > 1");
  require(window_lo > 0.0 && window_hi > window_lo && omega > window_lo &&
              omega < window_hi,
          "ni_collision_scaling: omega must sit inside the window");
  FluxOpts fo;
  fo.rel_tol = rel_tol;
  const PowerLawSpectrum base{1.0, rho, window_lo, window_hi};
  const PowerLawSpectrum scaled{1.0, rho, lambda * window_lo,
                                lambda * window_hi};
  const double j1 = particle_flux(base, omega, fo).value;
  const double j2 = particle_flux(scaled, lambda * omega, fo).value;
  if (j1 == 0.0 || j2 == 0.0 || (j1 > 0.0) != (j2 > 0.0))
    throw std::runtime_error(
        "ni_collision_scaling: flux ratio degenerate at this window");
  return std::log(j2 / j1) / std::log(lambda) - 1.0;
}

}  // namespace wke
