#include "wke/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wke/quadrature.hpp"
#include "wke/summation.hpp"

namespace wke {

double Measure::total_mass() const {
  Accum a;
  a.add(condensate);
  for (const auto& [x, m] : atoms) {
    (void)x;
    a.add(m);
  }
  for (size_t i = 0; i < density_values.size(); ++i)
    a.add(density_values[i] * (density_edges[i + 1] - density_edges[i]));
  return a.value();
}

double Measure::total_energy() const {
  Accum a;
  for (const auto& [x, m] : atoms) a.add(x * m);
  for (size_t i = 0; i < density_values.size(); ++i) {
    double lo = density_edges[i], hi = density_edges[i + 1];
    a.add(density_values[i] * 0.5 * (hi * hi - lo * lo));
  }
  return a.value();
}

double Measure::mass_in(double lo, double hi) const {
  Accum a;
  if (lo <= 0.0 && hi >= 0.0) a.add(condensate);
  for (const auto& [x, m] : atoms)
    if (x >= lo && x <= hi) a.add(m);
  for (size_t i = 0; i < density_values.size(); ++i) {
    double l = std::max(lo, density_edges[i]);
    double h = std::min(hi, density_edges[i + 1]);
    if (h > l) a.add(density_values[i] * (h - l));
  }
  return a.value();
}

double Measure::pair_with(const std::function<double(double)>& f,
                          const std::vector<double>& kinks) const {
  Accum a;
  if (condensate != 0.0) a.add(condensate * f(0.0));
  for (const auto& [x, m] : atoms) a.add(m * f(x));
  for (size_t i = 0; i < density_values.size(); ++i) {
    if (density_values[i] == 0.0) continue;
    double lo = density_edges[i], hi = density_edges[i + 1];
    auto cell = integrate_pts(f, lo, hi, kinks, {1e-10, 1e-14, 200});
    a.add(density_values[i] * cell.value);
  }
  return a.value();
}

Measure Measure::scaled_positions(double s) const {
  Measure out;
  out.condensate = condensate;
  out.atoms.reserve(atoms.size());
  for (const auto& [x, m] : atoms) out.atoms.emplace_back(x * s, m);
  out.density_edges = density_edges;
  for (double& e : out.density_edges) e *= s;
  out.density_values = density_values;
  for (double& v : out.density_values) v /= s;  // cell masses preserved
  out.sort_atoms();
  return out;
}

void Measure::sort_atoms() {
  std::sort(atoms.begin(), atoms.end());
}

void Measure::merge_atoms(double tol) {
  sort_atoms();
  std::vector<std::pair<double, double>> out;
  for (const auto& [x, m] : atoms) {
    if (!out.empty() && x - out.back().first <= tol * std::max(1.0, x)) {
      // mass-weighted position keeps the first moment exact
      double M = out.back().second + m;
      if (M > 0.0)
        out.back().first = (out.back().first * out.back().second + x * m) / M;
      out.back().second = M;
    } else {
      out.emplace_back(x, m);
    }
  }
  atoms.swap(out);
}

double Measure::max_position() const {
  double hi = 0.0;
  if (!atoms.empty()) hi = atoms.back().first;
  if (!density_edges.empty()) hi = std::max(hi, density_edges.back());
  return hi;
}

Measure dirac(double pos, double mass) {
  Measure m;
  if (pos == 0.0)
    m.condensate = mass;
  else
    m.atoms.emplace_back(pos, mass);
  return m;
}

namespace {

double window_mass(const Measure& mu, double lo, double hi) {
  return mu.mass_in(lo, hi);
}

// candidate window radii: atom positions and their doubles (where the window
// content jumps) plus a 2^{1/8} grid over the support hull
std::vector<double> window_candidates(const Measure& mu, double rmin) {
  std::vector<double> cs;
  for (const auto& [x, m] : mu.atoms) {
    (void)m;
    if (x >= rmin / 2.0) {
      cs.push_back(std::max(x, rmin));
      cs.push_back(std::max(2.0 * x, rmin));
    }
  }
  double hi = std::max(mu.max_position() * 2.0, rmin * 2.0);
  double lo = rmin;
  if (!mu.atoms.empty()) lo = std::min(lo, std::max(mu.atoms.front().first, 1e-12));
  if (!mu.density_edges.empty() && mu.density_edges.front() > 0.0)
    lo = std::min(lo, mu.density_edges.front());
  lo = std::max(lo, rmin > 0.0 ? rmin : 1e-12);
  const double step = std::pow(2.0, 1.0 / 8.0);
  for (double r = lo; r <= hi * step; r *= step) cs.push_back(r);
  std::sort(cs.begin(), cs.end());
  cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
  return cs;
}

}  // namespace

double weighted_norm_rho(const Measure& mu, double rho) {
  double best = 0.0;
  for (double R : window_candidates(mu, 1e-12)) {
    double m = window_mass(mu, R / 2.0, R);
    if (m == 0.0) continue;
    best = std::max(best, std::pow(1.0 + R, -rho) / R * m);
  }
  return best;
}

ThetaNorm theta_rho_norm(const Measure& mu, double theta, double rho_star,
                         double tol) {
  ThetaNorm out;
  if (mu.has_density())
    throw std::invalid_argument("theta_rho_norm: needs a purely atomic measure");
  // family term: group atoms by dyadic level
  std::vector<std::pair<int, double>> level_mass;
  for (const auto& [x, m] : mu.atoms) {
    auto d = dyadic_decompose(x, 48, tol);
    if (!d)
      throw std::domain_error("theta_rho_norm: atom off the dyadic lattice: " +
                              std::to_string(x));
    bool found = false;
    for (auto& [al, mm] : level_mass)
      if (al == d->alpha) {
        mm += m;
        found = true;
      }
    if (!found) level_mass.emplace_back(d->alpha, m);
  }
  for (const auto& [al, mm] : level_mass)
    out.family_term = std::max(out.family_term, std::pow(2.0, al * theta) * mm);
  for (double R : window_candidates(mu, 1.0)) {
    if (R < 1.0) continue;
    double m = window_mass(mu, R / 2.0, R);
    if (m == 0.0) continue;
    out.window_term = std::max(out.window_term, m * std::pow(R, rho_star - 1.0));
  }
  return out;
}

double weak_distance(const Measure& a, const Measure& b,
                     const WeakDistOpts& opts) {
  struct Tent {
    double c, h, height;
  };
  std::vector<Tent> dict;
  for (int lvl = 0; lvl < 3; ++lvl) {
    int cells = 8 << lvl;
    double h = opts.omega_cap / cells;
    double height = std::min(h, 1.0);
    for (int j = 0; j <= cells; ++j) dict.push_back({j * h, h, height});
  }
  // entry 0 is the constant function (total-mass discrepancy)
  double best = std::abs(a.total_mass() - b.total_mass());
  int used = 1;
  for (const auto& t : dict) {
    if (used >= opts.max_dict) break;
    ++used;
    auto f = [&t](double w) {
      return t.height * std::max(0.0, 1.0 - std::abs(w - t.c) / t.h);
    };
    std::vector<double> kinks = {t.c - t.h, t.c, t.c + t.h};
    double va = a.pair_with(f, kinks);
    double vb = b.pair_with(f, kinks);
    best = std::max(best, std::abs(va - vb));
  }
  return best;
}

std::optional<DyadicIndex> dyadic_decompose(double x, int alpha_cap,
                                            double tol) {
  if (!(x > 0.0)) return std::nullopt;
  double y = x;
  for (int j = 0; j <= alpha_cap; ++j) {
    double n = std::nearbyint(y);
    // absolute tolerance in the scaled frame: a relative one goes vacuous
    // once y outgrows 1/tol and every position would "match"
    if (n >= 1.0 && std::abs(y - n) <= tol) {
      long long ni = (long long)n;
      if (j == 0) return DyadicIndex{0, ni};
      if (ni % 2 == 1) return DyadicIndex{j, (ni + 1) / 2};
      return std::nullopt;  // even multiple at the first matching level: off-lattice rounding
    }
    y *= 2.0;
  }
  return std::nullopt;
}

double dyadic_position(int alpha, long long k) {
  if (alpha == 0) return (double)k;
  return std::ldexp((double)(2 * k - 1), -alpha);
}

namespace {

void sort_merge(std::vector<double>& v, double tol) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v) {
    if (out.empty() || x - out.back() > tol * std::max(1.0, x))
      out.push_back(x);
  }
  v.swap(out);
}

// gcd over the reals with residues folded to the nearest lattice point;
// returns -1 when no common measure emerges (incommensurate)
double real_gcd(double a, double b, double tol) {
  for (int round = 0; round < 64; ++round) {
    if (b <= tol) return a;
    double r = std::fmod(a, b);
    r = std::min(r, b - r);
    a = b;
    b = r;
  }
  return -1.0;
}

}  // namespace

SupportClosure extended_support(std::vector<double> points, double cap,
                                int depth_cap, double tol,
                                std::size_t max_points) {
  SupportClosure out;
  // the origin participates as a generator in the first round but is never a
  // member of the closure itself
  sort_merge(points, tol);
  std::vector<double> cur = points;
  std::vector<double> acc;
  for (double x : cur)
    if (x > tol && x <= cap) acc.push_back(x);
  for (int depth = 0; depth < depth_cap; ++depth) {
    std::vector<double> next = acc;
    bool over = false;
    for (size_t i = 0; i < cur.size() && !over; ++i)
      for (size_t j = i; j < cur.size() && !over; ++j)
        for (size_t k = 0; k < cur.size(); ++k) {
          double t = cur[i] + cur[j] - cur[k];
          if (t > tol && t <= cap) next.push_back(t);
          if (next.size() > 16 * max_points) {
            sort_merge(next, tol);
            if (next.size() > max_points) {
              over = true;
              break;
            }
          }
        }
    sort_merge(next, tol);
    if (over || next.size() > max_points) {
      out.points = std::move(next);
      out.r_star = out.points.empty() ? 0.0 : out.points.front();
      out.dense = true;  // blew the budget: treat as (numerically) dense
      return out;
    }
    bool same = next.size() == acc.size();
    if (same)
      for (size_t i = 0; i < next.size(); ++i)
        if (std::abs(next[i] - acc[i]) > tol * std::max(1.0, next[i])) {
          same = false;
          break;
        }
    acc = next;
    cur = next;  // origin only seeds the first round
    if (same) {
      out.converged = true;
      break;
    }
  }
  out.points = acc;
  if (acc.empty()) {
    out.r_star = std::numeric_limits<double>::infinity();
    return out;
  }
  out.r_star = acc.front();
  if (out.r_star <= tol) {
    out.dense = true;
    return out;
  }
  // greedy generator gaps: fold every point onto the lattice spanned so far
  double g = 0.0;
  for (double p : acc) {
    double d = p - out.r_star;
    if (d <= tol) continue;
    if (g == 0.0) {
      g = d;
      out.gaps.push_back(d);
      continue;
    }
    double r = std::fmod(d, g);
    r = std::min(r, g - r);
    if (r > tol) {
      out.gaps.push_back(r);
      g = real_gcd(g, r, tol);
      if (g < 0.0 || g <= tol) {
        out.dense = true;
        return out;
      }
    }
  }
  // commensurability certificate: generator ratios must be modest rationals
  for (double d : out.gaps) {
    double q = d / (g > 0.0 ? g : d);
    if (q > 1e6) {
      out.dense = true;
      return out;
    }
  }
  // a converged closure keeps every gap at least as large as its infimum;
  // a violation means the iteration was truncated too early
  if (out.converged)
    for (double d : out.gaps)
      if (d < out.r_star - tol) out.converged = false;
  return out;
}

}  // namespace wke
