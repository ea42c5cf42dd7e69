#pragma once

// Shared collision-deposit machinery.  A measure is carried as point masses
// on a fixed sorted position set (slot 0 is always the origin).  Every
// ordered interaction (x_i, x_j; x_k) moves mass at a cubic rate
//   w = factor(x_i, x_j, x_k) * m_i * m_j * m_k,
// removing w from i and j and depositing w at k and at the combination
// x_i + x_j - x_k.  The deposit pattern conserves mass exactly and energy up
// to roundoff, and two-point remapping of off-grid targets preserves both
// while only ever increasing integrals of convex functions.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace wke {

enum class DepositMode {
  exact,  // targets must land on the support (pre-closed); misses are counted
  remap,  // targets split between the two bracketing grid positions
};

struct EngineParams {
  double sigma = 0.0;
  // weights of the two origin channels (merge into bulk / splitting assisted
  // by the origin); both zero decouples the origin entirely
  double alpha = 1.0;
  double beta = 1.0;
  double omega_cap = 1e9;   // combinations beyond this drain into the leak
  DepositMode mode = DepositMode::exact;
  double match_tol = 1e-9;  // exact-mode position matching
  double activity_floor = 0.0;  // relative to the largest mass
};

// interaction-rate prefactor for positions a, b (sources) and c; w4 gets the
// combination a + b - c.  Returns 0 whenever the interaction is inactive
// (negative combination, gap sigma unmet, origin channels at sigma > 0, two
// or more arguments at the origin).
double triple_factor(const EngineParams& par, double a, double b, double c,
                     double& w4);

class CollisionEngine {
 public:
  // positions need not be sorted or contain 0; both are arranged here.
  // In exact mode the caller is responsible for passing a set that is closed
  // under (a + b - c) within the cap -- see close_support().
  CollisionEngine(std::vector<double> positions, EngineParams par);

  const std::vector<double>& positions() const { return pos_; }
  const EngineParams& params() const { return par_; }
  std::size_t size() const { return pos_.size(); }

  // dm must have size() + 2 entries: per-slot mass rates followed by the
  // leak mass rate and leak energy rate
  void rhs(const std::vector<double>& m, std::vector<double>& dm) const;

  // exact-mode targets that matched no slot (drained to the leak instead);
  // a nonzero count means the support was not actually closed
  std::uint64_t missing_targets() const { return missing_; }

 private:
  int find_slot(double w) const;      // -1 when no match within tol
  void deposit(std::vector<double>& dm, double w4, double w) const;

  std::vector<double> pos_;
  EngineParams par_;
  mutable std::uint64_t missing_ = 0;
};

// smallest superset of `points` (plus the origin) that is closed under
// a + b - c within (0, cap]; throws std::runtime_error past max_size
std::vector<double> close_support(std::vector<double> points, double cap,
                                  std::size_t max_size = 4000,
                                  double tol = 1e-9);

}  // namespace wke
