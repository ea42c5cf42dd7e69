#include "wke/support_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wke/kernels.hpp"

namespace wke {

double triple_factor(const EngineParams& par, double a, double b, double c,
                     double& w4) {
  w4 = a + b - c;
  int nz = (a == 0.0) + (b == 0.0) + (c == 0.0);
  if (nz >= 2) return 0.0;
  if (nz == 1) {
    if (par.sigma > 0.0) return 0.0;
    if (c == 0.0) {
      // merge channel: (a, b; 0) -> mass to a + b and to the origin
      return par.alpha / std::sqrt(a * b);
    }
    // origin-assisted splitting: (0, b; c) -> b - c and c; active only when
    // the split is genuinely downward
    double s = std::max(a, b);  // the nonzero source
    if (s <= c) return 0.0;
    return par.beta / std::sqrt(s * c);
  }
  if (w4 < 0.0) return 0.0;
  double k = phi_sigma(par.sigma, a, b, c, w4);
  if (k == 0.0) return 0.0;
  return k / std::sqrt(a * b * c);
}

CollisionEngine::CollisionEngine(std::vector<double> positions,
                                 EngineParams par)
    : pos_(std::move(positions)), par_(par) {
  pos_.push_back(0.0);
  std::sort(pos_.begin(), pos_.end());
  pos_.erase(std::unique(pos_.begin(), pos_.end()), pos_.end());
  if (pos_.front() != 0.0) pos_.insert(pos_.begin(), 0.0);
  if (pos_.size() > 1 && pos_[1] <= 0.0)
    throw std::invalid_argument("CollisionEngine: negative positions");
}

int CollisionEngine::find_slot(double w) const {
  auto it = std::lower_bound(pos_.begin(), pos_.end(), w);
  double tol = par_.match_tol * std::max(1.0, w);
  int best = -1;
  double d = tol;
  if (it != pos_.end() && std::abs(*it - w) <= d) {
    best = (int)(it - pos_.begin());
    d = std::abs(*it - w);
  }
  if (it != pos_.begin() && std::abs(*(it - 1) - w) <= d)
    best = (int)(it - pos_.begin()) - 1;
  return best;
}

void CollisionEngine::deposit(std::vector<double>& dm, double w4,
                              double w) const {
  const std::size_t n = pos_.size();
  if (w4 > par_.omega_cap) {
    dm[n] += w;
    dm[n + 1] += w * w4;
    return;
  }
  if (par_.mode == DepositMode::exact) {
    int s = find_slot(w4);
    if (s < 0) {
      ++missing_;
      dm[n] += w;
      dm[n + 1] += w * w4;
      return;
    }
    dm[s] += w;
    return;
  }
  // remap: split between bracketing slots so mass and the first moment are
  // both preserved
  auto it = std::upper_bound(pos_.begin(), pos_.end(), w4);
  if (it == pos_.end()) {
    // beyond the last grid node but under the cap: treat as leakage too,
    // the grid simply does not extend this far
    dm[n] += w;
    dm[n + 1] += w * w4;
    return;
  }
  if (it == pos_.begin()) {  // w4 <= 0 cannot happen; w4 == 0 handled below
    dm[0] += w;
    return;
  }
  std::size_t r = (std::size_t)(it - pos_.begin());
  std::size_t l = r - 1;
  double span = pos_[r] - pos_[l];
  double lam = (pos_[r] - w4) / span;
  dm[l] += lam * w;
  dm[r] += (1.0 - lam) * w;
}

void CollisionEngine::rhs(const std::vector<double>& m,
                          std::vector<double>& dm) const {
  const std::size_t n = pos_.size();
  std::fill(dm.begin(), dm.end(), 0.0);

  double mmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) mmax = std::max(mmax, m[i]);
  const double floor = par_.activity_floor * mmax;

  std::vector<std::uint32_t> act;
  act.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (m[i] > floor && m[i] > 0.0) act.push_back((std::uint32_t)i);

  for (std::size_t ii = 0; ii < act.size(); ++ii) {
    const std::uint32_t i = act[ii];
    const double a = pos_[i];
    for (std::size_t jj = ii; jj < act.size(); ++jj) {
      const std::uint32_t j = act[jj];
      const double b = pos_[j];
      const double pairm = (i == j ? 1.0 : 2.0) * m[i] * m[j];
      for (const std::uint32_t k : act) {
        const double c = pos_[k];
        double w4;
        const double f = triple_factor(par_, a, b, c, w4);
        if (f == 0.0) continue;
        const double w = f * pairm * m[k];
        dm[i] -= w;
        dm[j] -= w;
        dm[k] += w;
        deposit(dm, w4, w);
      }
    }
  }
}

std::vector<double> close_support(std::vector<double> points, double cap,
                                  std::size_t max_size, double tol) {
  points.push_back(0.0);
  std::sort(points.begin(), points.end());
  std::vector<double> cur;
  for (double x : points)
    if ((x == 0.0 || x > tol) && x <= cap &&
        (cur.empty() || x - cur.back() > tol * std::max(1.0, x)))
      cur.push_back(x);
  for (int round = 0; round < 64; ++round) {
    std::vector<double> next = cur;
    for (std::size_t i = 0; i < cur.size(); ++i)
      for (std::size_t j = i; j < cur.size(); ++j)
        for (std::size_t k = 0; k < cur.size(); ++k) {
          double t = cur[i] + cur[j] - cur[k];
          if (t > tol && t <= cap) next.push_back(t);
        }
    std::sort(next.begin(), next.end());
    std::vector<double> merged;
    for (double x : next)
      if (merged.empty() || x - merged.back() > tol * std::max(1.0, x))
        merged.push_back(x);
    if (merged.size() > max_size)
      throw std::runtime_error(
          "close_support: support closure exceeds the size budget (set is "
          "dense or the cap too generous)");
    if (merged.size() == cur.size()) return merged;
    cur.swap(merged);
  }
  throw std::runtime_error("close_support: no fixed point within 64 rounds");
}

}  // namespace wke
