#pragma once

// Measure-valued evolution of the isotropic three-wave collision operator in
// its weak (test-function) form, with the origin participating as an explicit
// condensate.  Two discretizations share one conservative deposit engine:
// pure-atom collocation on the interaction closure of the initial support,
// and node remapping on a fixed grid for diffuse data.

#include <string>
#include <utility>
#include <vector>

#include "wke/measures.hpp"
#include "wke/ode.hpp"
#include "wke/support_engine.hpp"
#include "wke/testfn.hpp"

namespace wke {

enum class InteractionMode { interacting, noninteracting, general };

struct WeakRunConfig {
  std::vector<double> sigma_schedule{0.0};  // strictly decreasing, all >= 0
  InteractionMode mode = InteractionMode::interacting;
  double alpha = 1.0;  // condensate channel weights, general mode only
  double beta = 1.0;
  double omega_cap = 16.0;
  // 0: atom collocation on the closed support; > 0: that many uniform grid
  // cells on [0, omega_cap] with two-point deposit remapping
  int n_cells = 0;
  double horizon = 1.0;
  double snapshot_dt = 0.1;
  double activity_floor = 0.0;
  std::size_t max_support = 4000;
  OdeOpts ode{};
};

struct WeakSample {
  double t = 0;
  double mass = 0;
  double energy = 0;
  double condensate_mass = 0;
  double dist_to_dirac = 0;  // NaN when no dirac target applies
  double omega_center = 0;   // mass median over (0, inf)
  double eta_spread = 0;
  double front_radius = 0;   // energy median
};

using Trajectory = std::vector<std::pair<double, Measure>>;

struct WeakRunReport {
  std::vector<WeakSample> series;
  Trajectory snapshots;
  Measure final_state;
  double r_star = 0.0;
  bool r_star_dense = false;
  std::string verdict;  // "condensate" | "pulsating" | "inconclusive"
  double leak_mass = 0.0;
  double leak_energy = 0.0;
  double mass_drift = 0.0;    // |M + leak - M0| / M0 over the whole run
  double energy_drift = 0.0;  // same for the first moment
  std::vector<double> sigma_distances;  // consecutive-run final-state gaps
  bool cauchy_ok = true;
  OdeStatus ode_status;
};

// one conservative update of the symmetrized weak form over time dt
Measure weak_step(const Measure& mu, const WeakRunConfig& cfg, double sigma,
                  double dt);

// single-sigma evolution over the full horizon
WeakRunReport run_weak(const Measure& g_in, const WeakRunConfig& cfg,
                       double sigma);

// runs the whole sigma schedule, checking Cauchy behaviour of the final
// states in weak_distance; the last run is the reported solution
WeakRunReport sigma_continuation(const Measure& g_in,
                                 const WeakRunConfig& cfg);

// mass near the origin cannot escape: integral over [0, R/eta] at any time
// dominates (1 - eta) times the initial integral over [0, R]
bool tightness_check(const Trajectory& traj, double R, double eta);

struct MonotoneReport {
  bool ok = true;
  double worst = 0.0;  // most negative signed violation, scaled
  std::string worst_name;
};

// convex entries must not decrease, concave must not increase, affine must
// stay constant; violations below tol_rel * scale are roundoff
MonotoneReport monotone_functional_check(const Trajectory& traj,
                                         const std::vector<TestFn>& catalog,
                                         double tol_rel = 1e-8);

struct AsymptoticsReport {
  double r_star = 0.0;
  bool dense = false;
  std::vector<double> t;
  std::vector<double> dist_to_dirac;
  std::vector<double> omega_center;
  std::vector<double> eta_spread;
  std::string verdict;  // "condensate" | "pulsating" | "inconclusive"
};

AsymptoticsReport asymptotics_diagnostics(const Trajectory& traj,
                                          double omega_cap);

struct EnergyFrontReport {
  std::vector<double> t;
  std::vector<double> radius;    // energy median
  double slope_fit = 0.0;        // radius^2 ~ slope * t + r0sq
  double r0sq_fit = 0.0;
  double fit_rel_err = 0.0;
  // pairs (R, halving time of the saturating-ramp pairing at scale R);
  // time is NaN when the pairing never halves within the horizon
  std::vector<std::pair<double, double>> halving;
};

EnergyFrontReport energy_front(const Trajectory& traj,
                               const std::vector<double>& R_list);

struct OffdiagReport {
  double value = 0.0;     // at the largest R in the sweep
  double fitted_B = 0.0;  // least-squares slope of value vs R
  bool bounded_linear = true;
  std::vector<std::pair<double, double>> sweep;  // (R, value)
};

// time-integrated triple-product mass over the off-diagonal region of
// [0, R]^3 where the two smallest coordinates differ by more than rho times
// the middle one
OffdiagReport offdiagonal_mass_diagnostic(const Trajectory& traj,
                                          const std::vector<double>& R_list,
                                          double rho);

}  // namespace wke
