#include "wke/fluxes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wke/kernels.hpp"
#include "wke/quadrature.hpp"
#include "wke/summation.hpp"

namespace wke {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// +1 when om lies strictly between a and b going up, -1 going down.
double straddle(double a, double b, double om) {
  if (a < om && om < b) return 1.0;
  if (b < om && om < a) return -1.0;
  return 0.0;
}

// Particle crossing count of a collision (w1, w2) -> (w3, w4): the pair
// (w2 -> w3) and (w1 -> w4) legs each cross om at most once.
double kernel_n(double w1, double w2, double w3, double w4, double om) {
  return straddle(w2, w3, om) + straddle(w1, w4, om);
}

// Energy carried across om.  Every leg is referenced to w1; integrating this
// against psi' reproduces w4 psi(w4) + w3 psi(w3) - w1 psi(w1) - w2 psi(w2).
// The three terms cancel to O(w1 + om) pointwise, which is what makes the
// combined integral converge where the term-by-term integrals do not.  When
// the w4 and w2 legs straddle with the same sign, w4 - w2 = w1 - w3 is taken
// in that form: the legs themselves can be enormous where the difference is
// order one.
double kernel_e(double w1, double w2, double w3, double w4, double om) {
  const double s4 = straddle(w1, w4, om);
  const double s2 = straddle(w1, w2, om);
  const double s3 = straddle(w1, w3, om);
  if (s4 == s2) return (w1 - w3) * s4 + w3 * s3;
  return w4 * s4 + w3 * s3 - w2 * s2;
}

}  // namespace

// ---------------------------------------------------------------------------
// atomic spectra
// ---------------------------------------------------------------------------

namespace {

void require_atomic(const Measure& g, const char* who) {
  if (!g.density_values.empty())
    throw std::invalid_argument(std::string(who) +
                                ": atomic measure expected (density present)");
}

// Sum ker over the cubed measure: positive triples carry the
// sqrt(min)/sqrt(w1 w2 w3) rate; a condensate opens the two origin channels
// (merge with both orderings of the pair, origin-assisted split with the
// ordering factor collapsed to 2).
template <class K>
double atomic_sum(const Measure& g, K&& ker, double alpha, double beta) {
  const auto& at = g.atoms;
  Accum acc;
  for (const auto& [x1, m1] : at) {
    for (const auto& [x2, m2] : at) {
      for (const auto& [x3, m3] : at) {
        const double w4 = x1 + x2 - x3;
        if (w4 < 0.0) continue;
        const double p = phi(x1, x2, x3, w4);
        if (p == 0.0) continue;
        acc.add(m1 * m2 * m3 * p / std::sqrt(x1 * x2 * x3) *
                ker(x1, x2, x3, w4));
      }
    }
  }
  const double m0 = g.condensate;
  if (m0 > 0.0) {
    for (const auto& [x1, m1] : at)
      for (const auto& [x2, m2] : at)
        acc.add(alpha * m0 * m1 * m2 / std::sqrt(x1 * x2) *
                ker(x1, x2, 0.0, x1 + x2));
    for (const auto& [xs, ms] : at)
      for (const auto& [xc, mc] : at)
        if (xs > xc)
          acc.add(2.0 * beta * m0 * ms * mc / std::sqrt(xs * xc) *
                  ker(0.0, xs, xc, xs - xc));
  }
  return acc.value();
}

}  // namespace

double particle_flux(const Measure& g, double omega) {
  require_atomic(g, "particle_flux");
  return atomic_sum(
      g, [omega](double a, double b, double c, double d) {
        return kernel_n(a, b, c, d, omega);
      },
      1.0, 1.0);
}

double energy_flux(const Measure& g, double omega) {
  require_atomic(g, "energy_flux");
  return atomic_sum(
      g, [omega](double a, double b, double c, double d) {
        return kernel_e(a, b, c, d, omega);
      },
      1.0, 1.0);
}

// ---------------------------------------------------------------------------
// power-law spectra
// ---------------------------------------------------------------------------

double PowerLawSpectrum::operator()(double w) const {
  if (!(w > 0.0) || w < lo || w >= hi) return 0.0;
  return amp * std::pow(w, -gamma);
}

bool PowerLawSpectrum::flux_integrable(std::string* why) const {
  if (!(amp >= 0.0) || !(lo >= 0.0) || !(hi > lo)) {
    if (why) *why = "empty or negative spectrum";
    return false;
  }
  if (lo == 0.0 && gamma >= 1.0) {
    if (why)
      *why = "flux integrals diverge at the origin for gamma >= 1 "
             "(gamma = 1 fails by a logarithm); truncate below";
    return false;
  }
  if (hi == kInf && gamma <= 0.5) {
    if (why)
      *why = "flux integrals diverge at infinity for gamma <= 1/2; "
             "truncate above";
    return false;
  }
  return true;
}

namespace {

// One iterated-quadrature axis over [lo, hi] intersected with the spectrum's
// support: an algebraic x^{-s0} endpoint piece when lo = 0, an interior piece
// seeded with the kernel's jump locations, and a power-mapped tail when
// hi = inf.  Errors accumulate into *err when provided.
//
// The interior gets an octave ladder of extra breakpoints around `scale`:
// when a tail map upstairs samples this axis at an enormous coordinate the
// interior span covers many decades, and a lone Gauss panel across a decade
// gap reports both a tiny value and a tiny error while the true power-law
// mass under it is O(1).
double axis_integrate(const std::function<double(double)>& f, double lo,
                      double hi, double s0, double sinf, double scale,
                      std::vector<double> pts, const QuadOpts& o,
                      double* err) {
  if (!(hi > lo)) return 0.0;
  Accum val;
  double lo_eff = lo;
  double cap = (hi == kInf) ? 8.0 * scale : hi;
  if (lo == 0.0) {
    const double cut = std::min(0.25 * scale, 0.5 * cap);
    QuadResult r = integrate_pow0(f, cut, s0, o);
    val.add(r.value);
    if (err) *err += r.error;
    lo_eff = cut;
  }
  {
    for (double p = 2.0 * scale; p < cap; p *= 2.0) pts.push_back(p);
    for (double p = 0.5 * scale; p > lo_eff; p *= 0.5) pts.push_back(p);
    QuadResult r = integrate_pts(f, lo_eff, cap, std::move(pts), o);
    val.add(r.value);
    if (err) *err += r.error;
  }
  if (hi == kInf) {
    QuadResult r = integrate_tail(f, cap, sinf, o);
    val.add(r.value);
    if (err) *err += r.error;
  }
  return val.value();
}

// Iterated integral of g1 g2 g3 sqrt(min)/sqrt(w1 w2 w3) * ker over the
// collision domain {w3 < w1 + w2}.  All kernels used here jump only on the
// surfaces wk = om, w4 = om and kink on the min-switching planes, so every
// level gets those locations as explicit breakpoints; the power-law endpoint
// exponents come from the spectrum itself (sqrt(min) cancels the 1/sqrt(w)
// exactly when w is the smallest leg).
template <class K>
FluxValue flux_triple(const PowerLawSpectrum& g, double om, K&& ker,
                      const FluxOpts& fo) {
  std::string why;
  if (!g.flux_integrable(&why))
    throw std::invalid_argument("flux quadrature: " + why);
  if (!(om > 0.0)) throw std::invalid_argument("flux quadrature: omega <= 0");

  const QuadOpts o_out{fo.rel_tol, fo.abs_tol, fo.max_intervals};
  const QuadOpts o_mid{0.3 * fo.rel_tol, 0.1 * fo.abs_tol, fo.max_intervals};
  const QuadOpts o_in{0.1 * fo.rel_tol, 0.01 * fo.abs_tol, fo.max_intervals};
  const double scale = std::max(om, 1.0);
  const double s_tail = g.gamma + 0.5;

  // Each level keeps only its own variable's weight; the other legs' powers
  // multiply on the outside.  Folding them in looks equivalent but is not:
  // the tail maps sample the lower levels at astronomical coordinates, where
  // a folded-in prefactor pushes the whole inner integral below its absolute
  // tolerance floor and the Jacobian then blows the sloppy remainder back up.
  auto inner = [&](double w1, double w2) -> double {
    auto f3 = [&](double w3) -> double {
      const double w4 = w1 + w2 - w3;
      const double p = phi(w1, w2, w3, w4);
      if (p == 0.0) return 0.0;
      const double kv = ker(w1, w2, w3, w4);
      if (kv == 0.0) return 0.0;
      return g(w3) / std::sqrt(w3) * p * kv;
    };
    const double top = std::min(g.hi, w1 + w2);
    return axis_integrate(f3, g.lo, top, g.gamma, 0.0, scale,
                          {w1, w2, 0.5 * (w1 + w2), om, w1 + w2 - om}, o_in,
                          nullptr);
  };

  auto middle = [&](double w1) -> double {
    auto f2 = [&](double w2) {
      const double gw = g(w2);
      return gw == 0.0 ? 0.0 : gw / std::sqrt(w2) * inner(w1, w2);
    };
    return axis_integrate(f2, g.lo, g.hi, g.gamma, s_tail, scale,
                          {om, w1, std::abs(om - w1), om + w1}, o_mid, nullptr);
  };

  auto f1 = [&](double w1) {
    const double gw = g(w1);
    return gw == 0.0 ? 0.0 : gw / std::sqrt(w1) * middle(w1);
  };
  double err = 0.0;
  const double value = axis_integrate(f1, g.lo, g.hi, g.gamma, s_tail, scale,
                                      {om, 0.5 * om, 2.0 * om}, o_out, &err);
  return {value, err};
}

}  // namespace

FluxValue particle_flux(const PowerLawSpectrum& g, double omega,
                        const FluxOpts& opts) {
  return flux_triple(
      g, omega,
      [omega](double a, double b, double c, double d) {
        return kernel_n(a, b, c, d, omega);
      },
      opts);
}

FluxValue energy_flux(const PowerLawSpectrum& g, double omega,
                      const FluxOpts& opts) {
  return flux_triple(
      g, omega,
      [omega](double a, double b, double c, double d) {
        return kernel_e(a, b, c, d, omega);
      },
      opts);
}

FluxValue energy_flux_parts(const PowerLawSpectrum& g, double omega,
                            const FluxOpts& opts) {
  return flux_triple(
      g, omega,
      [omega](double a, double b, double c, double d) {
        return std::abs(kernel_e(a, b, c, d, omega));
      },
      opts);
}

FluxProfile flux_profile(const PowerLawSpectrum& g,
                         const std::vector<double>& omegas,
                         const FluxOpts& opts) {
  FluxProfile out;
  for (double om : omegas) {
    FluxValue n = particle_flux(g, om, opts);
    FluxValue e = energy_flux(g, om, opts);
    out.omega.push_back(om);
    out.jn.push_back(n.value);
    out.err_n.push_back(n.error);
    out.je.push_back(e.value);
    out.err_e.push_back(e.error);
  }
  return out;
}

// ---------------------------------------------------------------------------
// flux / weak-form identity
// ---------------------------------------------------------------------------

IdentityCheck flux_identity_check(const Measure& g,
                                  const std::function<double(double)>& phi_fn) {
  require_atomic(g, "flux_identity_check");
  if (g.condensate != 0.0)
    throw std::invalid_argument("flux_identity_check: atoms only");

  IdentityCheck out;
  const auto& at = g.atoms;

  // collision brackets, summed directly
  Accum lhs, scale;
  for (const auto& [x1, m1] : at)
    for (const auto& [x2, m2] : at)
      for (const auto& [x3, m3] : at) {
        const double w4 = x1 + x2 - x3;
        if (w4 < 0.0) continue;
        const double p = phi(x1, x2, x3, w4);
        if (p == 0.0) continue;
        const double w = m1 * m2 * m3 * p / std::sqrt(x1 * x2 * x3);
        const double br = phi_fn(w4) + phi_fn(x3) - phi_fn(x1) - phi_fn(x2);
        lhs.add(w * br);
        scale.add(std::abs(w * br));
      }
  out.lhs = lhs.value();
  out.scale = scale.value();

  // the flux is piecewise constant between atom positions and reachable w4
  // values; its pairing with phi' telescopes over the pieces
  std::vector<double> cuts;
  for (const auto& [x, m] : at) {
    (void)m;
    cuts.push_back(x);
  }
  for (const auto& [x1, m1] : at)
    for (const auto& [x2, m2] : at)
      for (const auto& [x3, m3] : at) {
        const double w4 = x1 + x2 - x3;
        if (w4 > 0.0) cuts.push_back(w4);
      }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) {
                           return std::abs(a - b) <= 1e-12 * std::max(a, b);
                         }),
             cuts.end());

  Accum rhs;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const double j = particle_flux(g, mid);
    rhs.add(j * (phi_fn(cuts[i + 1]) - phi_fn(cuts[i])));
  }
  out.rhs = rhs.value();
  out.gap = std::abs(out.lhs - out.rhs);
  return out;
}

// ---------------------------------------------------------------------------
// the pairing constant
// ---------------------------------------------------------------------------

namespace {

// Gauss series for 2F1(a, b; c; 1/2); geometric convergence.
double hyp2f1_half(double a, double b, double c) {
  double term = 1.0;
  Accum sum;
  sum.add(1.0);
  for (int n = 0; n < 400; ++n) {
    term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * 0.5;
    sum.add(term);
    if (std::abs(term) < 1e-18 * std::abs(sum.value())) return sum.value();
  }
  throw std::runtime_error("hyp2f1_half: series did not settle");
}

double cstar_series_route() {
  const double head = 24.0 * (std::cbrt(2.0) - 1.0);
  // incomplete Beta with the negative second parameter, via
  // B_z(a, b) = z^a / a * 2F1(a, 1 - b; a + 1; z) at z = 1/2
  const double a = 5.0 / 6.0;
  const double b_half =
      std::pow(0.5, a) / a * hyp2f1_half(a, 13.0 / 6.0, 11.0 / 6.0);
  const double b_full = std::exp(std::lgamma(4.0 / 3.0) +
                                 std::lgamma(5.0 / 6.0) -
                                 std::lgamma(13.0 / 6.0));
  return head - 14.0 * b_half + 14.0 * b_full;
}

double cstar_quadrature_route() {
  QuadOpts o{1e-12, 1e-15, 4000};
  // int_0^{1/2} x^{-1/6} (1-x)^{-13/6} dx
  QuadResult i1 = integrate_pow0(
      [](double x) {
        return std::pow(x, -1.0 / 6.0) * std::pow(1.0 - x, -13.0 / 6.0);
      },
      0.5, 1.0 / 6.0, o);
  // int_0^1 x^{1/3} (1-x)^{-1/6} dx, flipped so the algebraic end sits at 0
  QuadResult i2 = integrate_pow0(
      [](double u) {
        return std::pow(u, -1.0 / 6.0) * std::pow(1.0 - u, 1.0 / 3.0);
      },
      1.0, 1.0 / 6.0, o);
  return 24.0 * (std::cbrt(2.0) - 1.0) - 14.0 * i1.value + 14.0 * i2.value;
}

}  // namespace

CstarReport cstar() {
  CstarReport r;
  r.route_beta = cstar_series_route();
  r.route_quadrature = cstar_quadrature_route();
  r.gap = std::abs(r.route_beta - r.route_quadrature);
  r.value = r.route_beta;
  if (r.gap > 1e-5)
    throw std::runtime_error("cstar: independent routes disagree");
  return r;
}

double cstar_value() {
  static const double v = cstar_series_route();
  return v;
}

double f_profile(double xi) {
  if (!(xi > 0.0)) throw std::invalid_argument("f_profile: xi <= 0");
  return cstar_value() * std::pow(xi, -4.0 / 3.0);
}

// ---------------------------------------------------------------------------
// condensate-interaction defect
// ---------------------------------------------------------------------------

double pair_defect_pairing(double amp, const std::function<double(double)>& phi_fn,
                           double supp_lo, double supp_hi,
                           const FluxOpts& opts) {
  if (!(supp_hi > supp_lo) || !(supp_lo > 0.0))
    throw std::invalid_argument("pair_defect_pairing: bad support window");
  const QuadOpts o_out{opts.rel_tol, opts.abs_tol, opts.max_intervals};
  const QuadOpts o_in{0.1 * opts.rel_tol, 0.1 * opts.abs_tol,
                      opts.max_intervals};

  auto outer_f = [&](double w1) -> double {
    auto f2 = [&](double w2) -> double {
      // evaluated jointly: the three terms only make sense together (each one
      // alone is a divergent integral; the bracket is O(w2^2) at the origin)
      const double br =
          phi_fn(w1 + w2) + phi_fn(w1 - w2) - 2.0 * phi_fn(w1);
      if (br == 0.0) return 0.0;
      return std::pow(w1 * w2, -7.0 / 6.0) * br;
    };
    std::vector<double> pts = {supp_lo - w1, supp_hi - w1, w1 - supp_hi,
                               w1 - supp_lo};
    return integrate_pts(f2, 0.0, w1, std::move(pts), o_in).value;
  };

  // below supp_lo / 2 every argument of the bracket falls under the support
  const double lo1 = 0.5 * supp_lo;
  const double cap = 2.0 * supp_hi;
  Accum total;
  total.add(integrate_pts(outer_f, lo1, cap,
                          {supp_lo, supp_hi, 0.5 * supp_hi}, o_out)
                .value);
  total.add(integrate_tail(outer_f, cap, 7.0 / 3.0, o_out).value);
  // merge face (symmetric in its two legs) plus the two mirror split faces,
  // each equal to the ordered integral once phi(0) drops out
  return 2.0 * amp * amp * total.value();
}

double ni_residual(const KZMeasure& kz, const std::function<double(double)>& phi_fn,
                   double supp_lo, double supp_hi, const FluxOpts& opts) {
  const double m = kz.condensate();
  if (m == 0.0) return 0.0;
  return -m * pair_defect_pairing(kz.K, phi_fn, supp_lo, supp_hi, opts);
}

// ---------------------------------------------------------------------------
// transport form
// ---------------------------------------------------------------------------

namespace {

// Exact pairing int J phi' over the brackets; the energy channel runs through
// the same collision list with the frequency-weighted test function.
double bracket_pairing(const Measure& g,
                       const std::function<double(double)>& f) {
  return atomic_sum(
      g,
      [&](double w1, double w2, double w3, double w4) {
        return f(w4) + f(w3) - f(w1) - f(w2);
      },
      1.0, 1.0);
}

}  // namespace

TransportReport transport_balance_check(const Trajectory& traj,
                                        const std::function<double(double)>& phi_fn,
                                        const std::function<double(double)>& psi_fn) {
  if (traj.size() < 2)
    throw std::invalid_argument("transport_balance_check: need >= 2 snapshots");
  auto wpsi = [&](double w) { return w * psi_fn(w); };

  TransportReport rep;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const auto& [t0, g0] = traj[k];
    const auto& [t1, g1] = traj[k + 1];
    const double dt = t1 - t0;
    if (!(dt > 0.0))
      throw std::invalid_argument("transport_balance_check: times not increasing");

    const double dn = (g1.pair_with(phi_fn) - g0.pair_with(phi_fn)) / dt;
    const double fn = 0.5 * (bracket_pairing(g0, phi_fn) +
                             bracket_pairing(g1, phi_fn));
    rep.gap_n = std::max(rep.gap_n, std::abs(dn - fn));
    rep.scale_n = std::max({rep.scale_n, std::abs(dn), std::abs(fn)});

    const double de = (g1.pair_with(wpsi) - g0.pair_with(wpsi)) / dt;
    const double fe = 0.5 * (bracket_pairing(g0, wpsi) +
                             bracket_pairing(g1, wpsi));
    rep.gap_e = std::max(rep.gap_e, std::abs(de - fe));
    rep.scale_e = std::max({rep.scale_e, std::abs(de), std::abs(fe)});
  }
  return rep;
}

}  // namespace wke
