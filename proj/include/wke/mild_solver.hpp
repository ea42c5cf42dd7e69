#pragma once

// Bounded mild solutions: the collision operator split into a gain measure
// and a pointwise loss rate, advanced by an exponential integrator so that
// positivity is structural.  Densities live as f = g/sqrt(omega) on a
// geometric grid; the tail beyond the cap is extrapolated with the
// configured decay exponent.

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "wke/measures.hpp"

namespace wke {

struct MildParams {
  double sigma = 0.0;
  double rho = -1.0;  // decay class: g ~ C omega^rho, rho < -1/2
  double omega_min = 1e-3;
  double omega_cap = 64.0;
  int n_cells = 96;
  double quad_rel = 1e-6;
  double safety = 0.5;   // dt <= safety / sup(loss rate)
  double dt_max = 0.25;
  double blowup_factor = 1e3;
  int threads = 1;
};

struct MildGrid {
  std::vector<double> edges;    // n_cells + 1, geometric
  std::vector<double> centers;  // geometric midpoints
};

MildGrid make_grid(const MildParams& par);

struct MildState {
  double t = 0.0;
  MildGrid grid;
  std::vector<double> f;  // f = g / sqrt(omega) at cell centers
  MildParams par;

  double f_at(double w) const;  // piecewise interpolation + power tail
  double mass() const;          // integral of g over the grid
  double energy() const;        // integral of omega * g
  double sup_f() const;
  double min_f() const;
  Measure to_measure() const;   // cell-averaged density representation
};

MildState make_mild_state(const std::function<double(double)>& f_init,
                          const MildParams& par);

// loss rate at omega1 for a density state (>= 0 up to quadrature error)
double a_sigma_density(const MildState& s, double w1);
// gain in the g-normalization at omega1
double o_sigma_density(const MildState& s, double w1);

// loss rate against a purely atomic measure; needs sigma > 0
double a_sigma(const Measure& g, const MildParams& par, double w1);
// gain measure against a purely atomic measure (finite atom set out)
Measure o_sigma(const Measure& g, const MildParams& par);

// one exponential-integrator step of size dt
MildState mild_step(const MildState& s, double dt);

struct MildRow {
  double t, mass, energy, sup_norm, min_f;
};

struct MildRunResult {
  std::vector<MildRow> rows;
  MildState final_state;
  std::string verdict;  // "completed" | "blew_up" | "error"
  double blowup_t = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

MildRunResult run_mild(const std::function<double(double)>& f_init,
                       const MildParams& par, double horizon,
                       double snapshot_dt);

}  // namespace wke
