#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "wke/measures.hpp"
#include "wke/testfn.hpp"

namespace wke {

// Instantaneous weak-form action d/dt <g, phi> of the sigma = 0 interacting
// dynamics on an atomic measure: the collision triple sum plus the condensate
// merge / split channels at unit weight.  A finite sum, exact to rounding.
double weak_action(const Measure& g, const std::function<double(double)>& phi);

// max |weak_action| over the catalog.  For a single point mass every bracket
// vanishes term by term, so the result is exactly zero — not small, zero.
double isotropic_residual(const Measure& g, const std::vector<TestFn>& catalog);
double isotropic_residual(double m, double omega0,
                          const std::vector<TestFn>& catalog);

// --- nonisotropic point families --------------------------------------------

using Vec3 = std::array<double, 3>;

struct VectorConfig {
  std::vector<Vec3> vectors;
  std::vector<double> masses;

  // sizes match, masses positive, vectors pairwise distinct
  void validate() const;
};

// One interaction channel candidate: the wave vectors at slots 2, 3, 4 chosen
// from the configuration (slot 1 is determined by momentum conservation) and
// the energy mismatch
//   delta = |k3 + k4 - k2|^2 + |k2|^2 - (|k3|^2 + |k4|^2).
// Choices with k2 at the same index as k3 or k4 make delta vanish identically
// (the exchange moves nothing) and are excluded from the enumeration.
struct ResonanceDefect {
  std::vector<std::array<int, 3>> triples;  // (i2, i3, i4), ordered, i3/i4 free
  std::vector<double> delta;                // same length
  double tol = 0.0;                         // absolute: rel_tol * max |K|^2
  double min_abs_delta = std::numeric_limits<double>::infinity();
  bool nonresonant = true;                  // all |delta| > tol
};

ResonanceDefect resonance_defect(const VectorConfig& cfg,
                                 double rel_tol = 1e-6);

// Greedy rejection sampler over the unit ball: candidates that bring any
// |delta| under the tolerance (which also weeds out near-duplicates) are
// discarded.  Unit masses.  Throws when the attempt budget runs out.
VectorConfig sample_nonresonant(int L, std::uint64_t seed,
                                double rel_tol = 1e-6, int budget = 10000);

}  // namespace wke
