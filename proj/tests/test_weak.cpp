#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "wke/weak_solver.hpp"

using namespace wke;

namespace {

Measure two_atoms() {
  Measure g;
  g.atoms = {{1.0, 0.5}, {2.0, 0.5}};
  return g;
}

WeakRunConfig atomic_cfg(double cap, double horizon, double snap) {
  WeakRunConfig c;
  c.omega_cap = cap;
  c.horizon = horizon;
  c.snapshot_dt = snap;
  c.ode.rel_tol = 1e-8;
  return c;
}

}  // namespace

TEST_CASE("a single point mass is stationary in every mode") {
  Measure g = dirac(1.5, 2.0);
  for (auto mode : {InteractionMode::interacting, InteractionMode::noninteracting}) {
    WeakRunConfig c = atomic_cfg(10.0, 1.0, 0.5);
    c.mode = mode;
    Measure out = weak_step(g, c, 0.0, 0.25);
    REQUIRE(out.atoms.size() == 1);
    CHECK(out.atoms[0].first == 1.5);
    CHECK(out.atoms[0].second == 2.0);
    CHECK(out.condensate == 0.0);
  }
}

TEST_CASE("general-mode weights reproduce the named modes exactly") {
  Measure g;
  g.condensate = 0.4;
  g.atoms = {{1.0, 0.6}, {2.0, 0.3}};
  WeakRunConfig ci = atomic_cfg(12.0, 1.0, 0.5);
  ci.mode = InteractionMode::interacting;
  WeakRunConfig cg = ci;
  cg.mode = InteractionMode::general;
  cg.alpha = 1.0;
  cg.beta = 1.0;
  Measure a = weak_step(g, ci, 0.0, 0.1);
  Measure b = weak_step(g, cg, 0.0, 0.1);
  REQUIRE(a.atoms.size() == b.atoms.size());
  CHECK(a.condensate == b.condensate);
  for (std::size_t i = 0; i < a.atoms.size(); ++i) {
    CHECK(a.atoms[i].first == b.atoms[i].first);
    CHECK(a.atoms[i].second == b.atoms[i].second);
  }
  WeakRunConfig cn = ci;
  cn.mode = InteractionMode::noninteracting;
  WeakRunConfig cg0 = ci;
  cg0.mode = InteractionMode::general;
  cg0.alpha = 0.0;
  cg0.beta = 0.0;
  Measure an = weak_step(g, cn, 0.0, 0.1);
  Measure bn = weak_step(g, cg0, 0.0, 0.1);
  CHECK(an.condensate == bn.condensate);
  REQUIRE(an.atoms.size() == bn.atoms.size());
  for (std::size_t i = 0; i < an.atoms.size(); ++i)
    CHECK(an.atoms[i].second == bn.atoms[i].second);
}

TEST_CASE("mass and energy ledgers stay closed on an atomic run") {
  WeakRunConfig c = atomic_cfg(12.0, 5.0, 0.5);
  auto rep = run_weak(two_atoms(), c, 0.0);
  CHECK(rep.mass_drift < 1e-10);
  CHECK(rep.energy_drift < 1e-10);
  CHECK(rep.ode_status.ok);
  // interactions genuinely happened
  CHECK(rep.final_state.atoms.size() > 2);
}

TEST_CASE("condensate-assisted merging feeds the condensate and conserves") {
  Measure g;
  g.condensate = 0.5;
  g.atoms = {{2.0, 1.0}};
  WeakRunConfig c = atomic_cfg(16.0, 2.0, 0.25);
  auto rep = run_weak(g, c, 0.0);
  CHECK(rep.mass_drift < 1e-10);
  CHECK(rep.energy_drift < 1e-10);
  // merge channel moves atom mass up and its partner mass to the origin
  CHECK(rep.final_state.condensate > 0.5);
  double m4 = 0.0;
  for (const auto& [x, m] : rep.final_state.atoms)
    if (x == 4.0) m4 = m;
  CHECK(m4 > 0.0);
  // once positive, the condensate never decreases in interacting mode
  for (std::size_t s = 1; s < rep.series.size(); ++s)
    CHECK(rep.series[s].condensate_mass >=
          rep.series[s - 1].condensate_mass - 1e-12);
  // with the origin decoupled the same state is frozen
  WeakRunConfig cn = c;
  cn.mode = InteractionMode::noninteracting;
  auto repn = run_weak(g, cn, 0.0);
  CHECK(repn.final_state.condensate == 0.5);
  REQUIRE(repn.final_state.atoms.size() == 1);
  CHECK(repn.final_state.atoms[0].second == 1.0);
}

TEST_CASE("lattice support is invariant and the origin stays empty") {
  WeakRunConfig c = atomic_cfg(12.0, 4.0, 0.5);
  auto rep = run_weak(two_atoms(), c, 0.0);
  auto closure = extended_support({1.0, 2.0}, c.omega_cap);
  for (const auto& [t, mu] : rep.snapshots) {
    (void)t;
    CHECK(mu.condensate == 0.0);  // no interaction reaches the origin here
    for (const auto& [x, m] : mu.atoms) {
      (void)m;
      bool on = false;
      for (double p : closure.points)
        if (std::abs(x - p) <= 1e-10 * std::max(1.0, x)) on = true;
      CHECK(on);
    }
  }
}

TEST_CASE("sigma continuation is Cauchy and stationary data stays put") {
  WeakRunConfig c = atomic_cfg(12.0, 2.0, 0.5);
  c.sigma_schedule = {1.0, 0.5, 0.25, 0.125, 0.0};
  auto rep = sigma_continuation(two_atoms(), c);
  CHECK(rep.cauchy_ok);
  REQUIRE(rep.sigma_distances.size() == 4);
  for (std::size_t k = 1; k < rep.sigma_distances.size(); ++k)
    CHECK(rep.sigma_distances[k] <= rep.sigma_distances[k - 1] * 1.2 + 1e-9);

  auto stat = sigma_continuation(dirac(1.0, 1.0), c);
  for (double d : stat.sigma_distances) CHECK(d <= 1e-12);

  WeakRunConfig bad = c;
  bad.sigma_schedule = {0.5, 0.5};
  CHECK_THROWS_AS((void)sigma_continuation(two_atoms(), bad),
                  std::invalid_argument);
}

TEST_CASE("mass near the origin cannot escape outward") {
  WeakRunConfig c = atomic_cfg(12.0, 4.0, 0.5);
  auto rep = run_weak(two_atoms(), c, 0.0);
  CHECK(tightness_check(rep.snapshots, 2.0, 0.5));
  CHECK(tightness_check(rep.snapshots, 3.0, 0.25));
  // stationary point mass passes trivially
  Trajectory stat = {{0.0, dirac(1.0, 1.0)}, {1.0, dirac(1.0, 1.0)}};
  CHECK(tightness_check(stat, 2.0, 0.5));
  // synthetic teleportation is caught
  Trajectory tele = {{0.0, dirac(1.0, 1.0)}, {1.0, dirac(5.0, 1.0)}};
  CHECK(!tightness_check(tele, 2.0, 0.5));
}

TEST_CASE("convex pairings grow, concave shrink, affine stay put") {
  // the cap is generous so that nothing leaks within the horizon: the
  // monotonicity statements hold for the untruncated dynamics
  WeakRunConfig c = atomic_cfg(40.0, 5.0, 0.25);
  auto rep = run_weak(two_atoms(), c, 0.0);
  CHECK(rep.leak_mass < 1e-15);
  auto mono = monotone_functional_check(rep.snapshots, default_catalog());
  INFO("worst violation ", mono.worst, " in ", mono.worst_name);
  CHECK(mono.ok);
}

TEST_CASE("two-atom data relaxes toward a point mass at the support infimum") {
  WeakRunConfig c = atomic_cfg(12.0, 60.0, 5.0);
  auto rep = run_weak(two_atoms(), c, 0.0);
  auto diag = asymptotics_diagnostics(rep.snapshots, c.omega_cap);
  CHECK(diag.r_star == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(!diag.dense);
  // the gap to the limiting point mass shrinks substantially
  REQUIRE(diag.dist_to_dirac.size() >= 3);
  double d0 = diag.dist_to_dirac.front();
  double dT = diag.dist_to_dirac.back();
  CHECK(dT < 0.5 * d0);
}

TEST_CASE("energy front of a stationary state does not move") {
  Trajectory stat;
  for (int s = 0; s <= 4; ++s) stat.emplace_back(0.5 * s, dirac(2.0, 1.0));
  auto rep = energy_front(stat, {1.0});
  for (double r : rep.radius) CHECK(r == 2.0);
  CHECK(std::abs(rep.slope_fit) < 1e-12);
}

TEST_CASE("off-diagonal triple products vanish for one atom, not for two") {
  Trajectory one;
  for (int s = 0; s <= 3; ++s) one.emplace_back(s, dirac(1.0, 1.0));
  auto r1 = offdiagonal_mass_diagnostic(one, {0.5, 1.0, 2.0}, 0.5);
  CHECK(r1.value == 0.0);

  Trajectory two;
  for (int s = 0; s <= 3; ++s) two.emplace_back(s, two_atoms());
  // with rho = 0.4 the triple (1,2,2) is off-diagonal: mid - lo = 1 > 0.8
  auto r2 = offdiagonal_mass_diagnostic(two, {2.0, 3.0, 4.0}, 0.4);
  CHECK(r2.value > 0.0);
  CHECK(r2.bounded_linear);
}

TEST_CASE("diffuse data on a grid condenses and keeps its ledgers") {
  Measure g;
  g.density_edges = {0.0, 0.5, 1.0};
  g.density_values = {1.0, 0.6};
  WeakRunConfig c;
  c.n_cells = 64;
  c.omega_cap = 16.0;
  c.horizon = 2.0;
  c.snapshot_dt = 0.25;
  c.ode.rel_tol = 1e-7;
  auto rep = run_weak(g, c, 0.0);
  CHECK(rep.mass_drift < 1e-8);
  CHECK(rep.energy_drift < 1e-8);
  CHECK(rep.final_state.condensate > 1e-4);
  for (std::size_t s = 1; s < rep.series.size(); ++s)
    CHECK(rep.series[s].condensate_mass >=
          rep.series[s - 1].condensate_mass - 1e-12);
  auto mono = monotone_functional_check(rep.snapshots, default_catalog());
  INFO("worst violation ", mono.worst, " in ", mono.worst_name);
  CHECK(mono.ok);
}
