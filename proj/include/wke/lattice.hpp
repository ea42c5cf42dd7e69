#pragma once

// Dense dynamics on the dyadic point families x_alpha(k) = 2^{-alpha} *
// theta_alpha(k) (theta_0(k) = k, theta_alpha(k) = 2k-1 for alpha >= 1).
// After rescaling by the frame factor 2^A (A = alpha_max) every admissible
// position is an integer slot n >= 1, so resonance bookkeeping is exact
// integer arithmetic and parity statements hold bit-for-bit.

#include <cstdint>
#include <string>
#include <vector>

#include "wke/measures.hpp"
#include "wke/ode.hpp"

namespace wke {

struct DyadicPoint {
  int alpha = 0;     // family index >= 0
  long long k = 1;   // rank >= 1
};

// position x_alpha(k)
double dyadic_point_position(const DyadicPoint& p);
// family/rank of integer slot n on the 2^{-A} frame
DyadicPoint slot_point(long long n, int frame_log2);

struct LatticeParams {
  int alpha_max = 2;       // finest family; frame factor is 2^alpha_max
  double omega_cap = 8.0;  // positions beyond this leak (tallied, not dropped)
  OdeOpts ode;             // positivity is forced on by the integrator calls
};

struct LatticeState {
  int frame_log2 = 0;  // A
  double t = 0.0;      // integer-frame clock
  // a[n] = mass at position n * 2^{-A}; slot 0 unused (0 is not a point)
  std::vector<double> a;
  double leak_mass = 0.0;    // escaped past omega_cap
  double leak_energy = 0.0;  // physical (position-weighted) units

  long long slots() const { return (long long)a.size() - 1; }
  double position(long long n) const;
  double total_mass() const;    // excludes leak
  double total_energy() const;  // excludes leak
  Measure to_measure() const;   // atoms at occupied slots
};

// Snap a purely atomic measure onto the lattice.  Throws std::invalid_argument
// when the measure carries a condensate or a density part, when an atom is
// farther than tol (in position units) from every admissible point, or when an
// atom sits above omega_cap.
LatticeState project_to_lattice(const Measure& g, const LatticeParams& par,
                                double tol = 1e-9);

// One collision quadruple on the integer frame: the pair (i, j) loses, the
// partner p and the target t = i + j - p gain; w = mult * sqrt(min) / sqrt(ijp)
// with mult = 2 for i < j (the two orderings of the pair).  Entries with
// p == i or p == j are "trivial": their four deposits cancel slot-by-slot.
struct Resonance {
  long long i = 0, j = 0, p = 0, t = 0;
  double w = 0.0;
  bool trivial = false;
};

// All quadruples whose three input legs are occupied slots of the state
// (targets may be unoccupied or beyond the last slot).  Exact by construction.
std::vector<Resonance> enumerate_resonances(const LatticeState& s);

// Deposit-form right-hand side on the integer-frame clock.  da has the same
// layout as s.a; leak_m / leak_e collect the rates of mass and physical energy
// carried past the last slot.  Total of da plus leak_m vanishes identically.
void lattice_rhs(const LatticeState& s, std::vector<double>& da, double& leak_m,
                 double& leak_e);

// Reduced three-mode model for the slow exchange between a dominant middle
// mode and its two sidebands: s = a2^2 (a1 + a3/sqrt(3)), a1' = a3' = s/2,
// a2' = -s.  The mass rate sums to zero exactly in floating point; the
// (1/2, 1, 3/2)-weighted energy rate vanishes to rounding.
struct SlowPhase {
  double a1 = 0.0, a2 = 0.0, a3 = 0.0;
};
SlowPhase slow_phase_rhs(const SlowPhase& y);
SlowPhase slow_phase_model(double alpha1, double alpha2, double alpha3,
                           double tbar, const OdeOpts& opts = {});
// Frozen-a2 linearization of the growing sideband:
//   a1(tbar) = ((sqrt(3) alpha1 + alpha3)/(sqrt(3)+1)) e^{K tbar}
//              - (alpha3 - alpha1)/(sqrt(3)+1),  K = alpha2^2 (sqrt(3)+1)/(2 sqrt(3))
double slow_phase_closed_form(double alpha1, double alpha2, double alpha3,
                              double tbar);

// Per-family aggregates: m[g] = mass of family g, tail sums
// M[g] = sum_{h >= g} m[h] and S[g] = sum_{h >= g} m[h]/sqrt(x_h(1)).
// Arrays have size alpha_max + 2 so M[g+1], S[g+1] are always addressable.
struct FamilyStats {
  std::vector<double> m, M, S;
};
FamilyStats family_masses(const LatticeState& s);

// Checks d m_g / dt <= 6 m_g / x_g(1) + 6 M_{g+1} (S_{g+1} + 1/sqrt(x_g(1)))^2
// along a snapshot trajectory by forward differences; the bound is evaluated
// at both endpoints and the larger value is used, plus tol_scale * scale.
bool family_growth_bound_check(const std::vector<LatticeState>& traj,
                               double tol_scale = 1e-6,
                               std::string* why = nullptr);

// Constants of the window-time and seeding formulas.  The defaults follow the
// derivation (C1 from the logistic rate 1/(L^2 2^g) with L = 4, C2 = 6 * 2^g
// from the family growth bound, B = 3); all are configuration because only
// their orders of magnitude are pinned.
struct ScheduleConstants {
  double B = 3.0;
  double c1_scale = 1.0 / 16.0;  // C1(g) = c1_scale * 2^{-g}
  double c2_scale = 6.0;         // C2(g) = c2_scale * 2^{g}
  // The window-time display is ambiguous about whether C1 multiplies or
  // divides the bracket; both conventions are selectable, multiply is default.
  bool c1_divides = false;

  double C1(int g) const;
  double C2(int g) const;
  // gentler constants that keep the seeding cascade inside desk horizons
  static ScheduleConstants desk();
};

// Time for the dominant mode to climb from eps/2 to 1 - 3 eta under the
// logistic bound; requires eps in (0,1), eta in (0,1/3), and returns a
// negative value when the bracket itself is negative (infeasible corner).
double window_time(double eps, double eta, int gamma,
                   const ScheduleConstants& c = {});

// Seeding cap Q(g; eps_g) = min{ eps/B, C2(g) 2^{-g} eps / 24, 2^{g/2} }.
double seeding_cap(int gamma, double eps_gamma,
                   const ScheduleConstants& c = {});

struct EpsilonSchedule {
  std::vector<double> eps;  // eps[0..alpha_max], sums to 1
  std::vector<double> t;    // window times at the final eps
  bool feasible = true;
  std::string note;
};
// Inductive construction: provisional eps_0 = 1/2, each later eps_alpha takes
// the largest value allowed by the recursive cap, and eps_0 absorbs the
// remainder (always >= 3/4 by the 2^{-alpha}/2 structure of the cap).
EpsilonSchedule epsilon_schedule(int alpha_max, const std::vector<double>& eta,
                                 const ScheduleConstants& c = {});

struct PulseWindow {
  int family = 0;
  double t_lo = 0.0, t_hi = 0.0;
  double level = 0.0;  // min over the window of a_family(1) / total mass
};

struct PulsatingReport {
  std::vector<LatticeState> snapshots;
  std::vector<PulseWindow> windows;  // per family, chronological
  bool plateau0 = false;             // family-0 window containing t = 0
  bool relocated = false;            // family-1 window after the plateau
  double relocation_level = 0.0;     // best family-1 window level
  // max over transition snapshots of (inf over rescalings a of the weak
  // distance between the position-scaled state and a unit Dirac)
  double transition_distance = 0.0;
  double mass_drift = 0.0;    // |(final mass + leak) - initial| / initial
  double energy_drift = 0.0;  // same for physical energy
  std::string verdict;        // "ok", "no_plateau", "no_relocation"
  OdeStatus ode_status;
};

// Integrates the lattice system from a_alpha(0) = eps_alpha at x_alpha(1);
// eta supplies the per-family window thresholds 1 - 4 eta_alpha.
PulsatingReport pulsating_run(const std::vector<double>& eps,
                              const std::vector<double>& eta,
                              const LatticeParams& par, double horizon,
                              double snapshot_dt);

// inf over a grid of rescalings a of weak_distance(positions * a, mass Dirac
// at 1); the building block of the pulsation distance statistic
double rescaled_dirac_distance(const Measure& g);

}  // namespace wke
