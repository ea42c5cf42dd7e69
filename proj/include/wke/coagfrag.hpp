#pragma once
#include <functional>
#include <vector>

namespace wke {

// Reduced two-scale model for a condensing solution: a macroscopic particle
// reservoir of mass M sits at the origin while the energy-carrying tail is
// resolved as a density G(t, w) at frequencies w ~ R.  Interactions that
// matter at leading order exchange exactly one quantum with the reservoir:
//
//   fragmentation   w2 + (0) -> (w2 - w3) + w3     rate  2 G2 G3 / sqrt(w2 w3)
//   coagulation     w1 + w2  -> (w1 + w2) + (0)    rate    G1 G2 / sqrt(w1 w2)
//
// Both channels conserve the tail energy int w G dw exactly; the tail
// particle number int G dw is exchanged with the reservoir.  For profiles
// resolved away from the origin the two exchange rates balance exactly, so
// net reservoir growth is carried entirely by the flux of the 1/sqrt(w) dust
// tail into w = 0.  Time below is measured in units of R^2/(2M), the natural
// clock of the reduced dynamics.

// Log-uniform grid node[i] = lo * (hi/lo)^{i/(n-1)}.
struct CoagGrid {
  double lo = 0.0;
  double hi = 0.0;
  int n = 0;
  std::vector<double> node;

  static CoagGrid make(double lo, double hi, int n);
  double step() const;  // log spacing ln(node[i+1]/node[i])
};

struct CoagFragState {
  double tbar = 0.0;  // time in units of R^2/(2M)
  double M = 1.0;     // reservoir mass (bookkeeping for physical units)
  double R = 1.0;     // frequency scale of the initial tail
  CoagGrid grid;
  std::vector<double> G;  // density samples at grid.node, >= 0

  // int w^p G dw by the trapezoid rule in log w.
  double moment(double p) const;
};

// Frequency below which half of the tail energy sits (log-linear
// interpolation of the cumulative energy).  The self-similar front.
double front_radius(const CoagFragState& s);

struct CoagRhsOpts {
  double rel_tol = 1e-8;
  double abs_floor = 1e-13;  // absolute tolerance, relative to (max H)^2 w
  int max_intervals = 800;
};

// The three convergent groupings of dG/dtbar at frequency w.  Written with
// H = G/sqrt(w), the five formal gain/loss integrals regroup into
//
//   second_diff = int_0^{w/2}  H(x) [H(w-x) + H(w+x) - 2 H(w)] dx
//   one_sided   = int_{w/2}^w  H(x) [H(w+x) - 2 H(w)] dx
//   far_tail    = int_w^inf    H(x)  H(w+x) dx
//
// Each piece is finite whenever H grows slower than x^{-2} at the grid
// floor; the formal pieces they came from diverge separately (the loss
// integrals see the full reservoir) and only this combination is meaningful.
// On the thermal family H = a/x the pieces evaluate in closed form to
// (a^2/w) ln(4/3), (a^2/w) ln(3/8) and (a^2/w) ln 2, which sum to zero.
struct RhsPieces {
  double second_diff = 0.0;
  double one_sided = 0.0;
  double far_tail = 0.0;
  double sum() const { return second_diff + one_sided + far_tail; }
};

// dG/dtbar at a single node / at every node.  The profile is extended
// beyond the grid by the power law fitted to the outermost node pair, so a
// resolved power tail keeps its analytic continuation instead of being
// chopped.  Throws std::runtime_error when the fitted floor exponent makes
// the combined integrand diverge at the grid floor (H ~ x^{-q}, q >= 2)
// or when a fitted ceiling tail is too fat to integrate (H ~ x^{-p},
// p <= 1/2 with a positive edge value).
RhsPieces coagfrag_rhs_at(const CoagFragState& s, int i,
                          const CoagRhsOpts& opts = {});
std::vector<double> coagfrag_rhs(const CoagFragState& s,
                                 const CoagRhsOpts& opts = {});

// d/dtbar int G psi dw through the channel brackets:
//
//   split = iint_{lo < c < b} H(b) H(c) [psi(b-c) + psi(c) - psi(b)]
//   merge = 1/2 iint          H(a) H(b) [psi(a+b) - psi(a) - psi(b)]
//
// For psi(w) = w both brackets vanish identically (energy is conserved
// pointwise, not by cancellation between channels); for psi = 1 the split
// bracket is +1 and the merge bracket is -1, and the two totals balance
// exactly on resolved profiles.  Integration runs over the resolved span
// [lo, hi] plus the fitted power tail above hi; profiles whose fitted tail
// decays like x^{-p} with p <= 1 have separately divergent channel rates
// and are rejected (pair against coagfrag_rhs instead).
struct WeakExchange {
  double split = 0.0;
  double merge = 0.0;
  double total = 0.0;
};
WeakExchange coagfrag_weak(const CoagFragState& s,
                           const std::function<double(double)>& psi,
                           const CoagRhsOpts& opts = {});

// Classic RK4 with steps growing proportionally to (1 + tbar), matching the
// self-similar slowdown of the dynamics.  Returns the state at each
// requested time (strictly increasing, first >= initial tbar).  Steps are
// clipped to land on the requested times exactly.  Small negative
// undershoots (ringing at the front) are clamped to zero; an undershoot
// beyond neg_tol * max G aborts with std::runtime_error.
//
// The continuum dynamics conserves int w G dw exactly, but the collocated
// samples paired with any fixed moment rule drift at O(h^2) per unit time;
// over a long self-similar run that compounds to percents.  With
// conserve_energy set, each accepted step is rescaled onto the conserved
// manifold (uniform factor, the classic first-integral projection), which
// leaves shape diagnostics untouched and keeps the discrete moment pinned.
struct CoagRunOpts {
  double dt0 = 0.02;  // step at tbar = 0; dt = dt0 * (1 + tbar)
  double neg_tol = 1e-4;
  bool conserve_energy = true;
  CoagRhsOpts rhs;
};
std::vector<CoagFragState> run_coagfrag(const CoagFragState& init,
                                        const std::vector<double>& times,
                                        const CoagRunOpts& opts = {});

// Self-similar collapse diagnostic.  Each state is rescaled by
//   Phi(y) = (1 + tbar) G(y sqrt(1 + tbar)),   y = w / sqrt(1 + tbar),
// the exact invariance of the reduced dynamics (at tbar = 0 the rescaling
// is the identity).  Profiles from the trailing decade of time are compared
// on a common window of y anchored at the final front position; `distance`
// is the sup difference against the final profile, `scale` the sup of the
// final profile, and `metric` their ratio, which is invariant under joint
// dilations w -> c w and amplitude scalings G -> s G of the whole
// trajectory.  `small_y_exponent` is the log-log slope of the final profile
// over [0.02, 0.15] of the front, which the thermal dust tail pins at -1/2.
struct CollapseReport {
  double distance = 0.0;
  double scale = 0.0;
  double metric = 0.0;
  double small_y_exponent = 0.0;
  double y_front = 0.0;
  int profiles_used = 0;
  std::vector<double> y;         // comparison window samples
  std::vector<double> phi_last;  // final rescaled profile on `y`
};
CollapseReport selfsim_collapse(const std::vector<CoagFragState>& traj);

// Growth exponents R ~ t^r, M ~ t^m for tails g ~ w^{-rho} feeding the
// reservoir.  On 1/2 < rho < 1 both follow from the two-scale rate balance,
//   r = 1/(2 rho - 1),  m = (1 - rho)/(2 rho - 1);
// rho = 1 is the critical case (r = 1, m = 0 up to logarithms, flagged);
// for 1 < rho < 2 the particle number is finite, m = 0 and the collision
// scaling alone gives r = 1/rho.  Outside (1/2, 2) no such regime exists
// and std::invalid_argument is thrown.
struct ScalingLaws {
  double R_exponent = 0.0;
  double M_exponent = 0.0;
  bool log_critical = false;
};
ScalingLaws infinite_mass_scalings(double rho);

// Exponents of the non-interacting self-similar form
// g(t, w) = t^{-alpha} G(w / t^beta) preserving a w^{-rho} tail:
//   alpha = rho/(2 rho - 1),  beta = 1/(2 rho - 1),
// which satisfy the equation constraint 2 alpha - beta = 1 identically
// (identity_gap reports the roundoff of that combination).  On such a tail
// the collision integral scales like w^{1 - 3 rho}: faster-decaying than
// the w^{-rho} transport terms exactly when rho > 1/2, which is what makes
// the transport-only balance self-consistent.  Requires rho > 1/2.
struct SelfsimExponents {
  double alpha = 0.0;
  double beta = 0.0;
  double identity_gap = 0.0;        // 2 alpha - beta - 1
  double collision_exponent = 0.0;  // 1 - 3 rho
};
SelfsimExponents ni_selfsim_exponents(double rho);

// Measures the collision-term exponent on the trial tail w^{-rho} from the
// particle flux through co-scaled truncations:
//   exponent = ln(J_n[lam window](lam w) / J_n[window](w)) / ln(lam) - 1,
// which converges to 1 - 3 rho (flux counting minus one derivative).
double ni_collision_scaling(double rho, double lambda = 2.0,
                            double window_lo = 0.05, double window_hi = 20.0,
                            double omega = 1.0, double rel_tol = 1e-4);

}  // namespace wke
