#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <random>

#include "wke/fluxes.hpp"
#include "wke/kernels.hpp"
#include "wke/measures.hpp"
#include "wke/quadrature.hpp"
#include "wke/testfn.hpp"
#include "wke/weak_solver.hpp"

using namespace wke;

namespace {

Measure atoms(std::initializer_list<std::pair<double, double>> a) {
  Measure g;
  g.atoms = a;
  return g;
}

double tent(double w) { return w < 1.0 ? 1.0 - w : 0.0; }

// d/dt <g, tent> for the unit omega^{-2/3} spectrum, assembled from the
// symmetrized collision functional over the ordered octant wp >= w0 >= wm.
// Because the flux of that spectrum is frequency-independent this equals
// -J_n(1), which makes it a route to the flux value that shares no code
// with the kernel-based integrator beyond the 1-d quadrature rules.
double tent_route_jn1(double rel) {
  std::function<double(double)> tf = tent;
  QuadOpts oi{0.1 * rel, 1e-12, 2000}, om{0.1 * rel, 1e-12, 2000},
      oo{rel, 1e-11, 2000};
  auto inner = [&](double wp, double w0) {
    auto f = [&](double wm) {
      return std::pow(wp * w0 * wm, -7.0 / 6.0) * g0_reduced(tf, wp, w0, wm);
    };
    std::vector<double> pts = {1.0 - wp + w0, wp + w0 - 1.0, 1.0 + wp - w0,
                               1.0, wp - w0};
    const double cut = std::min(0.25 * w0, 0.125);
    const double head = integrate_pow0(f, cut, 2.0 / 3.0, oi).value;
    return head + integrate_pts(f, cut, w0, std::move(pts), oi).value;
  };
  auto mid = [&](double wp) {
    auto f = [&](double w0) { return inner(wp, w0); };
    const double cut = std::min(0.25 * wp, 0.125);
    const double head = integrate_pow0(f, cut, 5.0 / 6.0, om).value;
    return head +
           integrate_pts(f, cut, wp, {1.0, wp - 1.0, 0.5 * wp}, om).value;
  };
  // the integrand vanishes identically below wp = 1/2: all four tent
  // arguments land on [0, 1] where the bracket of an affine function cancels
  QuadResult h =
      integrate_pts([&](double wp) { return mid(wp); }, 0.45, 16.0,
                    {0.5, 1.0, 2.0, 4.0, 8.0}, oo);
  QuadResult t = integrate_tail([&](double wp) { return mid(wp); }, 16.0,
                                7.0 / 3.0, oo);
  return -6.0 * (h.value + t.value);
}

// frozen reference values; quadrature tolerances in the checks below are set
// an order looser than the agreement observed when they were recorded
constexpr double kJnKZ = -2.94950427;     // tent route, rel 1e-6
constexpr double kJnBox = -0.63866487;    // truncation [1/4, 4], omega = 1
constexpr double kTentBox = -0.43458346;  // same truncation, int_0^1 J_n

}  // namespace

TEST_CASE("two equal atoms: every flux value can be counted by hand") {
  // unit masses at 1 and 2: the only collision moving anything is
  // (2,2) -> (1,3), with rate 1/sqrt(2*2*1) * sqrt(min) = 1/2
  Measure g = atoms({{1.0, 1.0}, {2.0, 1.0}});

  // between the atoms only the downward leg to 1 crosses
  CHECK(particle_flux(g, 1.5) == -0.5);
  CHECK(energy_flux(g, 1.5) == -0.5);
  // between 2 and 3 only the upward leg to 3 crosses, carrying energy 3
  CHECK(particle_flux(g, 2.5) == 0.5);
  CHECK(energy_flux(g, 2.5) == 1.5);
  // outside the reachable hull nothing crosses
  CHECK(particle_flux(g, 0.5) == 0.0);
  CHECK(particle_flux(g, 5.0) == 0.0);
  CHECK(energy_flux(g, 0.5) == 0.0);
  CHECK(energy_flux(g, 5.0) == 0.0);
}

TEST_CASE("atomic fluxes scale with the masses as written") {
  const double a = 0.3, b = 0.7;
  Measure g = atoms({{1.0, a}, {2.0, b}});
  // the (2,2) -> (1,3) collision carries m(2)^2 m(1)
  CHECK(particle_flux(g, 1.5) == doctest::Approx(-a * b * b / 2.0).epsilon(1e-15));

  Measure g3 = atoms({{1.0, 3.0 * a}, {2.0, 3.0 * b}});
  CHECK(particle_flux(g3, 1.5) ==
        doctest::Approx(27.0 * particle_flux(g, 1.5)).epsilon(1e-15));
  CHECK(energy_flux(g3, 2.5) ==
        doctest::Approx(27.0 * energy_flux(g, 2.5)).epsilon(1e-15));
}

TEST_CASE("gradient identity: constant and affine test functions annihilate") {
  Measure g = atoms({{0.6, 0.9}, {1.7, 0.5}, {2.9, 1.1}});

  auto chk_const = flux_identity_check(g, [](double) { return 3.7; });
  CHECK(chk_const.lhs == 0.0);
  CHECK(chk_const.rhs == 0.0);
  CHECK(chk_const.gap == 0.0);

  // affine brackets cancel term by term, up to rounding in w1 + w2 - w3
  auto chk_aff = flux_identity_check(g, [](double w) { return 0.4 - 1.3 * w; });
  CHECK(std::abs(chk_aff.lhs) <= 1e-13);
  CHECK(chk_aff.gap <= 1e-12);
}

TEST_CASE("gradient identity holds on random three-atom measures") {
  TestFn phi_fn = spline_bump_fn(1.8, 0.7);  // support [0.4, 3.2]
  std::mt19937_64 rng(20240917);
  std::uniform_real_distribution<double> pos(0.3, 4.0), mass(0.2, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    Measure g = atoms({{pos(rng), mass(rng)},
                       {pos(rng), mass(rng)},
                       {pos(rng), mass(rng)}});
    auto chk = flux_identity_check(g, phi_fn.f);
    REQUIRE(chk.scale > 0.0);
    CHECK(chk.gap <= 1e-8 * chk.scale);
  }
}

TEST_CASE("spectra outside the convergence class are rejected") {
  const double inf = std::numeric_limits<double>::infinity();
  // too steep at the origin: the flux integrals diverge (log at gamma = 1)
  CHECK_THROWS_AS(particle_flux({1.0, 1.5, 0.0, inf}, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(energy_flux({1.0, 1.5, 0.0, inf}, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(particle_flux({1.0, 1.0, 0.0, inf}, 1.0),
                  std::invalid_argument);
  // too shallow at infinity
  CHECK_THROWS_AS(particle_flux({1.0, 0.4, 0.0, inf}, 1.0),
                  std::invalid_argument);
  // the same exponents are fine once the offending end is truncated
  CHECK_NOTHROW(particle_flux({1.0, 1.5, 0.25, 4.0}, 1.0));
  CHECK_NOTHROW(particle_flux({1.0, 0.4, 0.25, 4.0}, 1.0));
}

TEST_CASE("omega^{-2/3} particle flux matches the tent-route value") {
  // recompute the reference through the symmetrized functional; this path
  // never touches the straddle kernels or the wedge decomposition
  const double oracle = tent_route_jn1(1e-5);
  CHECK(oracle == doctest::Approx(kJnKZ).epsilon(5e-4));

  FluxOpts fo;
  fo.rel_tol = 1e-3;
  auto j1 = particle_flux(PowerLawSpectrum{}, 1.0, fo);
  CHECK(j1.value == doctest::Approx(kJnKZ).epsilon(2e-3));
  CHECK(j1.value < 0.0);

  // frequency independence, sampled at the cheap end of the range
  auto jh = particle_flux(PowerLawSpectrum{}, 0.5, fo);
  CHECK(jh.value == doctest::Approx(j1.value).epsilon(1e-2));
}

TEST_CASE("omega^{-2/3} energy flux vanishes through cancellation") {
  FluxOpts fo;
  fo.rel_tol = 3e-3;
  auto parts = energy_flux_parts(PowerLawSpectrum{}, 0.7, fo);
  auto je = energy_flux(PowerLawSpectrum{}, 0.7, fo);
  REQUIRE(parts.value > 0.0);
  CHECK(std::abs(je.value) <= 1e-3 * parts.value);
}

TEST_CASE("compact truncation: kernel route equals the symmetrized functional") {
  PowerLawSpectrum g{1.0, 2.0 / 3.0, 0.25, 4.0};

  FluxOpts fo;
  fo.rel_tol = 1e-4;
  CHECK(particle_flux(g, 1.0, fo).value ==
        doctest::Approx(kJnBox).epsilon(1e-3));

  // integrate the flux over (0, 1) ...
  auto jn = [&](double w) { return particle_flux(g, w, fo).value; };
  QuadResult through =
      integrate_pts(jn, 1e-4, 1.0, {0.125, 0.25, 0.5}, {3e-4, 1e-8, 400});
  CHECK(through.value == doctest::Approx(kTentBox).epsilon(1e-3));

  // ... and compare with the collision functional evaluated directly
  std::function<double(double)> tf = tent;
  QuadOpts oi{1e-6, 1e-12, 2000}, om{1e-6, 1e-12, 2000}, oo{1e-5, 1e-11, 2000};
  auto inner = [&](double wp, double w0) {
    auto f = [&](double wm) {
      return std::pow(wp * w0 * wm, -7.0 / 6.0) * g0_reduced(tf, wp, w0, wm);
    };
    return integrate_pts(f, 0.25, w0,
                         {1.0 - wp + w0, wp + w0 - 1.0, 1.0 + wp - w0, 1.0,
                          wp - w0},
                         oi)
        .value;
  };
  auto mid = [&](double wp) {
    return integrate_pts([&](double w0) { return inner(wp, w0); }, 0.25, wp,
                         {1.0, wp - 1.0, 0.5 * wp}, om)
        .value;
  };
  QuadResult sym = integrate_pts([&](double wp) { return mid(wp); }, 0.25, 4.0,
                                 {0.5, 1.0, 2.0}, oo);
  // d/dt <g, tent> = -int_0^1 J_n, so the sign flips between the routes
  CHECK(-6.0 * sym.value == doctest::Approx(kTentBox).epsilon(5e-4));
}

TEST_CASE("power counting survives truncation when the window co-scales") {
  // g = w^{-1} is the log-critical spectrum: admissible only on a truncated
  // window, where J_e at fixed truncation drifts like log(omega / lo) ...
  FluxOpts fo;
  fo.rel_tol = 1e-3;
  PowerLawSpectrum g1{1.0, 1.0, 1e-3, 1e3};
  const double a = energy_flux(g1, 0.25, fo).value;
  const double b = energy_flux(g1, 1.0, fo).value;
  const double c = energy_flux(g1, 4.0, fo).value;
  CHECK(a < b);
  CHECK(b < c);

  // ... while scaling the window with the probe point restores the formal
  // exponent exactly: J_e invariant, J_n down by lambda^{2-3}
  PowerLawSpectrum g4{1.0, 1.0, 4e-3, 4e3};
  const double b4 = energy_flux(g4, 4.0, fo).value;
  CHECK(b4 == doctest::Approx(b).epsilon(2e-4));
  const double jn1 = particle_flux(g1, 1.0, fo).value;
  const double jn4 = particle_flux(g4, 4.0, fo).value;
  CHECK(jn1 / jn4 == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("pairing constant: independent routes and pinned value") {
  CstarReport r = cstar();
  CHECK(std::abs(r.value - 0.32964) <= 1e-4);
  CHECK(r.gap <= 1e-5);
  CHECK(r.value > 0.0);
  CHECK(r.value == r.route_beta);
  CHECK(cstar_value() == r.route_beta);
  // the closed-form head term on its own
  CHECK(24.0 * (std::cbrt(2.0) - 1.0) ==
        doctest::Approx(6.2381049).epsilon(1e-6));
}

TEST_CASE("defect envelope is an exact power profile") {
  CHECK(f_profile(1.0) == cstar_value());
  CHECK(f_profile(2.0) / f_profile(1.0) ==
        doctest::Approx(std::pow(2.0, -4.0 / 3.0)).epsilon(1e-14));
  CHECK_THROWS_AS(f_profile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(f_profile(-1.0), std::invalid_argument);
}

TEST_CASE("condensate pairing reproduces the defect envelope on narrow bumps") {
  auto bump_at = [](double xi) {
    return std::function<double(double)>([xi](double w) {
      const double u = (w - xi) / (0.1 * xi);
      if (std::abs(u) >= 1.0) return 0.0;
      return std::exp(-1.0 / (1.0 - u * u));
    });
  };

  for (double xi : {1.0, 2.0}) {
    auto bump = bump_at(xi);
    const double lo = 0.9 * xi, hi = 1.1 * xi;
    const double ib = integrate(bump, lo, hi, {1e-12, 1e-15, 2000}).value;
    const double pd = pair_defect_pairing(1.0, bump, lo, hi);
    // the 1% band absorbs the finite-width correction (~0.25% at this width)
    CHECK(-pd / ib == doctest::Approx(f_profile(xi)).epsilon(0.01));
  }

  // quadratic amplitude dependence, identical quadrature path
  auto bump = bump_at(1.0);
  FluxOpts fo;
  fo.rel_tol = 1e-3;
  const double p1 = pair_defect_pairing(1.0, bump, 0.9, 1.1, fo);
  const double p2 = pair_defect_pairing(2.0, bump, 0.9, 1.1, fo);
  CHECK(p2 == doctest::Approx(4.0 * p1).epsilon(1e-15));

  CHECK_THROWS_AS(pair_defect_pairing(1.0, bump, 1.1, 0.9),
                  std::invalid_argument);
}

TEST_CASE("interacting-form residual of the condensing measure") {
  auto bump = [](double w) {
    const double u = (w - 1.0) / 0.1;
    if (std::abs(u) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - u * u));
  };

  KZMeasure kz;
  kz.K = 1.0;
  kz.jn_unit = kJnKZ;
  kz.t = 0.0;
  CHECK(kz.condensate() == 0.0);
  CHECK(ni_residual(kz, bump, 0.9, 1.1) == 0.0);

  kz.t = 2.0;
  const double m = kz.condensate();
  REQUIRE(m > 0.0);
  const double ib = integrate(bump, 0.9, 1.1, {1e-12, 1e-15, 2000}).value;
  const double r = ni_residual(kz, bump, 0.9, 1.1);
  // nonzero with a definite sign and size: the measure is not a solution of
  // the interacting weak form, and the failure is the full defect envelope
  CHECK(r > 0.0);
  CHECK(r == doctest::Approx(m * f_profile(1.0) * ib).epsilon(0.01));

  // m ~ K^3 and the pairing ~ K^2
  FluxOpts fo;
  fo.rel_tol = 1e-3;
  KZMeasure kz2 = kz;
  kz2.K = 2.0;
  CHECK(ni_residual(kz2, bump, 0.9, 1.1, fo) ==
        doctest::Approx(32.0 * ni_residual(kz, bump, 0.9, 1.1, fo))
            .epsilon(1e-12));

  // condensate bookkeeping: nonnegative, nondecreasing, tail as constructed
  CHECK(kz2.condensate() > kz.condensate());
  CHECK(kz.tail().gamma == doctest::Approx(2.0 / 3.0));
  CHECK(kz.tail().amp == kz.K);
}

TEST_CASE("flux profile keeps its error estimates under the tolerance") {
  PowerLawSpectrum g{1.0, 2.0 / 3.0, 0.25, 4.0};
  FluxOpts fo;
  fo.rel_tol = 1e-4;
  FluxProfile prof = flux_profile(g, {0.5, 1.0, 2.0}, fo);
  REQUIRE(prof.omega.size() == 3);
  REQUIRE(prof.jn.size() == 3);
  REQUIRE(prof.je.size() == 3);
  for (std::size_t i = 0; i < prof.omega.size(); ++i) {
    CHECK(prof.err_n[i] <=
          fo.rel_tol * std::abs(prof.jn[i]) + 10.0 * fo.abs_tol);
    CHECK(std::isfinite(prof.je[i]));
  }
  CHECK(prof.jn[1] == doctest::Approx(kJnBox).epsilon(1e-3));
}

TEST_CASE("transport balance along atomic trajectories") {
  // a lone atom never collides: both balances are exactly zero
  Measure one = dirac(1.3, 0.8);
  Trajectory still{{0.0, one}, {0.5, one}, {1.0, one}};
  TestFn probe = spline_bump_fn(1.3, 0.9);
  auto rep = transport_balance_check(still, probe.f, probe.f);
  CHECK(rep.gap_n == 0.0);
  CHECK(rep.gap_e == 0.0);
  CHECK(rep.scale_n == 0.0);
  CHECK(rep.scale_e == 0.0);

  CHECK_THROWS_AS(transport_balance_check(Trajectory{{0.0, one}}, probe.f,
                                          probe.f),
                  std::invalid_argument);

  // an evolving run: the mismatch is trapezoid error, second order in the
  // snapshot spacing
  auto run_with = [](double snap) {
    Measure g0 = atoms({{1.0, 0.7}, {2.0, 0.4}});
    WeakRunConfig cfg;
    cfg.omega_cap = 24.0;
    cfg.horizon = 0.2;
    cfg.snapshot_dt = snap;
    return run_weak(g0, cfg, 0.0).snapshots;
  };
  TestFn phi_fn = spline_bump_fn(2.0, 1.5);
  auto coarse = transport_balance_check(run_with(0.1), phi_fn.f, phi_fn.f);
  auto fine = transport_balance_check(run_with(0.05), phi_fn.f, phi_fn.f);
  REQUIRE(coarse.scale_n > 0.01);
  REQUIRE(coarse.scale_e > 0.01);
  CHECK(coarse.gap_n <= 1e-3 * coarse.scale_n);
  CHECK(coarse.gap_e <= 1e-3 * coarse.scale_e);
  CHECK(fine.gap_n <= 0.6 * coarse.gap_n);
  CHECK(fine.gap_e <= 0.6 * coarse.gap_e);
}
