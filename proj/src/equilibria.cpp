#include "wke/equilibria.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "wke/kernels.hpp"
#include "wke/summation.hpp"

namespace wke {

double weak_action(const Measure& g, const std::function<double(double)>& f) {
  if (g.has_density())
    throw std::invalid_argument("weak_action: atomic measures only");
  const auto& at = g.atoms;
  Accum total;

  for (const auto& [x1, m1] : at)
    for (const auto& [x2, m2] : at)
      for (const auto& [x3, m3] : at) {
        const double w4 = x1 + x2 - x3;
        if (w4 < 0.0) continue;
        const double p = phi(x1, x2, x3, w4);
        if (p == 0.0) continue;
        const double br = f(w4) + f(x3) - f(x1) - f(x2);
        if (br == 0.0) continue;
        total.add(m1 * m2 * m3 * p / std::sqrt(x1 * x2 * x3) * br);
      }

  if (g.condensate > 0.0) {
    const double m0 = g.condensate;
    // merge of two quanta through the origin mass, both orderings
    for (const auto& [x1, m1] : at)
      for (const auto& [x2, m2] : at) {
        const double br = f(x1 + x2) + f(0.0) - f(x1) - f(x2);
        if (br == 0.0) continue;
        total.add(m0 * m1 * m2 / std::sqrt(x1 * x2) * br);
      }
    // split of the larger against the smaller
    for (const auto& [xs, ms] : at)
      for (const auto& [xc, mc] : at) {
        if (!(xs > xc)) continue;
        const double br = f(xs - xc) + f(xc) - f(0.0) - f(xs);
        if (br == 0.0) continue;
        total.add(2.0 * m0 * ms * mc / std::sqrt(xs * xc) * br);
      }
  }
  return total.value();
}

double isotropic_residual(const Measure& g,
                          const std::vector<TestFn>& catalog) {
  double worst = 0.0;
  for (const auto& t : catalog)
    worst = std::max(worst, std::abs(weak_action(g, t.f)));
  return worst;
}

double isotropic_residual(double m, double omega0,
                          const std::vector<TestFn>& catalog) {
  if (m < 0.0 || omega0 < 0.0)
    throw std::invalid_argument("isotropic_residual: m, omega0 >= 0");
  Measure g;
  if (omega0 == 0.0)
    g.condensate = m;
  else if (m > 0.0)
    g.atoms = {{omega0, m}};
  return isotropic_residual(g, catalog);
}

// --- nonisotropic point families --------------------------------------------

namespace {

double norm2(const Vec3& k) { return k[0] * k[0] + k[1] * k[1] + k[2] * k[2]; }

// |k3 + k4 - k2|^2 + |k2|^2 - (|k3| ^2 + |k4|^2), grouped so that swapping
// k3 and k4 reproduces the value bit for bit
double energy_mismatch(const Vec3& k2, const Vec3& k3, const Vec3& k4) {
  Vec3 k1;
  for (int c = 0; c < 3; ++c) k1[c] = k3[c] + k4[c] - k2[c];
  return (norm2(k1) + norm2(k2)) - (norm2(k3) + norm2(k4));
}

}  // namespace

void VectorConfig::validate() const {
  if (vectors.size() != masses.size())
    throw std::invalid_argument("VectorConfig: vectors/masses size mismatch");
  for (double m : masses)
    if (!(m > 0.0)) throw std::invalid_argument("VectorConfig: masses > 0");
  for (std::size_t i = 0; i < vectors.size(); ++i)
    for (std::size_t j = i + 1; j < vectors.size(); ++j)
      if (vectors[i] == vectors[j])
        throw std::invalid_argument("VectorConfig: duplicate wave vector");
}

ResonanceDefect resonance_defect(const VectorConfig& cfg, double rel_tol) {
  cfg.validate();
  const int n = static_cast<int>(cfg.vectors.size());

  double scale = 0.0;
  for (const auto& k : cfg.vectors) scale = std::max(scale, norm2(k));
  if (scale == 0.0) scale = 1.0;

  ResonanceDefect out;
  out.tol = rel_tol * scale;
  for (int i2 = 0; i2 < n; ++i2)
    for (int i3 = 0; i3 < n; ++i3) {
      if (i3 == i2) continue;
      for (int i4 = 0; i4 < n; ++i4) {
        if (i4 == i2) continue;
        const double d = energy_mismatch(cfg.vectors[i2], cfg.vectors[i3],
                                         cfg.vectors[i4]);
        out.triples.push_back({i2, i3, i4});
        out.delta.push_back(d);
        out.min_abs_delta = std::min(out.min_abs_delta, std::abs(d));
        if (std::abs(d) <= out.tol) out.nonresonant = false;
      }
    }
  return out;
}

VectorConfig sample_nonresonant(int L, std::uint64_t seed, double rel_tol,
                                int budget) {
  if (L < 1) throw std::invalid_argument("sample_nonresonant: L >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);

  VectorConfig cfg;
  int attempts = 0;
  while (static_cast<int>(cfg.vectors.size()) < L) {
    if (++attempts > budget)
      throw std::runtime_error("sample_nonresonant: rejection budget of " +
                               std::to_string(budget) + " exhausted");
    Vec3 k{coord(rng), coord(rng), coord(rng)};
    if (norm2(k) > 1.0) continue;
    bool dup = false;
    for (const auto& v : cfg.vectors) dup = dup || v == k;
    if (dup) continue;  // validate() would refuse; treat as one more rejection
    cfg.vectors.push_back(k);
    cfg.masses.push_back(1.0);
    if (!resonance_defect(cfg, rel_tol).nonresonant) {
      cfg.vectors.pop_back();
      cfg.masses.pop_back();
    }
  }
  return cfg;
}

}  // namespace wke
