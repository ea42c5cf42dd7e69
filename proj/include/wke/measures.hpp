#pragma once
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace wke {

// Finite nonnegative measure on [0, inf): a point mass at the origin, a
// finite atom list, and an optional histogram density.
struct Measure {
  double condensate = 0.0;
  std::vector<std::pair<double, double>> atoms;  // (position > 0, mass)
  std::vector<double> density_edges;             // ascending, >= 0
  std::vector<double> density_values;            // mean density per cell

  bool has_density() const { return density_values.size() > 0; }
  double total_mass() const;
  double total_energy() const;

  // mass of the closed window [lo, hi]; the condensate counts iff lo <= 0
  double mass_in(double lo, double hi) const;
  // integral of f against the measure; density cells are integrated with the
  // adaptive rule, seeded with the supplied kinks
  double pair_with(const std::function<double(double)>& f,
                   const std::vector<double>& kinks = {}) const;
  // pushforward of positions w -> a*w, masses kept
  Measure scaled_positions(double a) const;
  void sort_atoms();
  // merge atoms closer than tol (relative to the larger position)
  void merge_atoms(double tol);
  double max_position() const;
};

Measure dirac(double pos, double mass);

// sup over window radii R of (1+R)^{-rho} R^{-1} mu([R/2, R]); candidates are
// the atom positions, their doubles, and a geometric 2^{1/8} grid over the
// support hull.
double weighted_norm_rho(const Measure& mu, double rho);

struct ThetaNorm {
  double family_term = 0.0;
  double window_term = 0.0;
  double value() const { return family_term + window_term; }
};
// sup_alpha 2^{alpha*theta} mu(Omega_alpha) + sup_{R>=1} mu([R/2,R]) R^{rho*-1}.
// Atoms must sit on the dyadic lattice within tol; throws otherwise.
ThetaNorm theta_rho_norm(const Measure& mu, double theta, double rho_star,
                         double tol = 1e-12);

struct WeakDistOpts {
  double omega_cap = 8.0;
  int max_dict = 64;
};
// Bounded-Lipschitz style distance over a fixed dictionary: the constant 1,
// then tents on dyadic meshes of [0, cap] at three scales, heights clamped so
// every entry is 1-Lipschitz and bounded by 1.
double weak_distance(const Measure& a, const Measure& b,
                     const WeakDistOpts& opts = {});

// decomposition of x > 0 as 2^{-alpha} k with k odd (alpha >= 1) or integer
// (alpha = 0); nullopt if x is farther than tol*max(1,x) from every such point
struct DyadicIndex {
  int alpha = 0;
  long long k = 0;
};
std::optional<DyadicIndex> dyadic_decompose(double x, int alpha_cap = 48,
                                            double tol = 1e-12);
double dyadic_position(int alpha, long long k);

// iterated collision closure of a finite support set:
//   A_{n+1} = (A_n + A_n - A_n)Intersect(0, cap],   A* = union
struct SupportClosure {
  std::vector<double> points;
  double r_star = 0.0;
  std::vector<double> gaps;  // greedy generator gaps D_k (empty for one point)
  bool dense = false;        // infimum 0 / incommensurate generators
  bool converged = false;    // fixed point reached within the caps
};
SupportClosure extended_support(std::vector<double> points, double cap,
                                int depth_cap = 32, double tol = 1e-9,
                                std::size_t max_points = 20000);

}  // namespace wke
