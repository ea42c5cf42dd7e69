#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "wke/measures.hpp"
#include "wke/weak_solver.hpp"

namespace wke {

// Isotropic spectrum amp * w^{-gamma} on [lo, hi), zero outside.  lo = 0 and
// hi = inf are the untruncated defaults; truncation exists for the formally
// scale-invariant profiles whose full-range flux integrals diverge.
struct PowerLawSpectrum {
  double amp = 1.0;
  double gamma = 2.0 / 3.0;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  double operator()(double w) const;

  // Absolute convergence of the wedge integrals: gamma < 1 is needed at the
  // origin (gamma = 1 already fails by a logarithm) and gamma > 1/2 at
  // infinity.  Truncating the relevant end lifts the corresponding condition.
  bool flux_integrable(std::string* why = nullptr) const;
};

// Nested-quadrature result; error is the outer adaptive estimate.
struct FluxValue {
  double value = 0.0;
  double error = 0.0;
};

struct FluxOpts {
  double rel_tol = 1e-6;  // outer target; inner levels run tighter
  double abs_tol = 1e-10;
  int max_intervals = 400;  // per quadrature level
};

// --- atomic spectra: the fluxes are finite sums, exact to rounding ---------

// Net particle transport across omega: per ordered atom triple the collision
// moves the pair (w1, w2) to (w3, w4 = w1+w2-w3), which crosses omega exactly
// when omega separates w2 from w3 or w1 from w4.
double particle_flux(const Measure& g, double omega);

// Energy analogue: each leg carries its frequency, with the crossing
// direction resolved by the sign of (w1 - omega) against each partner.
double energy_flux(const Measure& g, double omega);

// --- power-law spectra: iterated adaptive quadrature -----------------------

// Throw std::invalid_argument when flux_integrable fails.
FluxValue particle_flux(const PowerLawSpectrum& g, double omega,
                        const FluxOpts& opts = {});
FluxValue energy_flux(const PowerLawSpectrum& g, double omega,
                      const FluxOpts& opts = {});
// Same integrand as energy_flux with the combined crossing kernel replaced
// by its absolute value: the L1 mass against which the cancellation of the
// critical spectrum's energy flux is measured.  (The kernel has to stay
// combined — its three parts are separately non-integrable.)
FluxValue energy_flux_parts(const PowerLawSpectrum& g, double omega,
                            const FluxOpts& opts = {});

struct FluxProfile {
  std::vector<double> omega;
  std::vector<double> jn, err_n;
  std::vector<double> je, err_e;
};
FluxProfile flux_profile(const PowerLawSpectrum& g,
                         const std::vector<double>& omegas,
                         const FluxOpts& opts = {});

// --- the flux / weak-form identity on atoms --------------------------------

// lhs: triple sum of the collision bracket [phi(w4)+phi(w3)-phi(w1)-phi(w2)];
// rhs: int J_n phi' evaluated exactly from the piecewise-constant flux
// (pieces cut at atom positions and at all reachable w4 values).
struct IdentityCheck {
  double lhs = 0.0, rhs = 0.0, gap = 0.0;
  double scale = 0.0;  // unsigned bracket mass, the relative-gap yardstick
};
IdentityCheck flux_identity_check(const Measure& g,
                                  const std::function<double(double)>& phi);

// --- the condensing power-law measure ---------------------------------------

// Condensate delta_0 of mass m(t) = -jn_unit K^3 t growing against a frozen
// K w^{-2/3} tail; jn_unit is the flux level of the unit-amplitude tail
// (negative, so the condensate grows).  Supply it from
// particle_flux(KZMeasure{.K = 1}.tail(), 1).
struct KZMeasure {
  double K = 1.0;
  double t = 0.0;
  double jn_unit = 0.0;

  double condensate() const { return -jn_unit * K * K * K * t; }
  PowerLawSpectrum tail() const { return {K, 2.0 / 3.0, 0.0,
                                          std::numeric_limits<double>::infinity()}; }
};

// --- the pairing constant ---------------------------------------------------

// c* = 24(2^{1/3}-1) - 14 B_{1/2}(5/6,-7/6) + 14 B(4/3,5/6), two ways:
// route_beta sums the Gauss series for the incomplete-Beta term and takes the
// complete Beta through lgamma; route_quadrature integrates both Beta
// integrals adaptively with the endpoint powers substituted away.  Throws
// std::runtime_error when the routes disagree beyond 1e-5.
struct CstarReport {
  double value = 0.0;
  double route_beta = 0.0;
  double route_quadrature = 0.0;
  double gap = 0.0;
};
CstarReport cstar();
double cstar_value();  // cached series route

// Envelope of the condensate-interaction defect against a unit-mass test
// bump at scale xi: c* xi^{-4/3}.
double f_profile(double xi);

// Pairing of phi against the condensate-tail interaction channels of a power
// tail amp w^{-2/3}: merge of two tail quanta plus the two mirror split
// faces.  With phi vanishing at the origin everything collapses to
//
//   2 iint_{w1 > w2} amp^2 (w1 w2)^{-7/6} [phi(w1+w2) + phi(w1-w2) - 2 phi(w1)],
//
// whose three terms diverge separately at w2 = 0 and only make sense jointly.
// For a narrow unit-mass bump at scale xi the value is -amp^2 f_profile(xi)
// up to O(width^2).  [supp_lo, supp_hi] must contain the support of phi.
double pair_defect_pairing(double amp, const std::function<double(double)>& phi,
                           double supp_lo, double supp_hi,
                           const FluxOpts& opts = {});

// Defect of the condensing measure in the interacting weak form:
// -m(t) * pair_defect_pairing(K, phi).  Zero exactly when m(t) = 0, and
// approximately +m(t) K^2 int phi(xi) c* xi^{-4/3} dxi for narrow bumps.
double ni_residual(const KZMeasure& kz, const std::function<double(double)>& phi,
                   double supp_lo, double supp_hi, const FluxOpts& opts = {});

// --- transport form of the dynamics -----------------------------------------

// Central-difference check of d/dt <g, phi> = int J_n phi' and
// d/dt <w g, psi> = int J_e psi' along an atomic trajectory, with the flux
// pairings evaluated exactly per snapshot and averaged trapezoidally.
// gap_* is the worst interval mismatch, scale_* the matching magnitude.
// The pairings are those of the sigma = 0 interacting dynamics (condensate
// channels at unit weight); trajectories produced with sigma > 0 carry an
// O(1) model mismatch, not a discretization error.
struct TransportReport {
  double gap_n = 0.0, scale_n = 0.0;
  double gap_e = 0.0, scale_e = 0.0;
};
TransportReport transport_balance_check(const Trajectory& traj,
                                        const std::function<double(double)>& phi,
                                        const std::function<double(double)>& psi);

}  // namespace wke
