#include "wke/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wke {

double phi(double w1, double w2, double w3, double w4) {
  if (w1 < 0.0 || w2 < 0.0 || w3 < 0.0 || w4 < 0.0) return 0.0;
  return std::sqrt(std::min(std::min(w1, w2), std::min(w3, w4)));
}

double phi_sigma(double sigma, double w1, double w2, double w3, double w4) {
  double m = std::min(std::min(w1, w2), std::min(w3, w4)) - sigma;
  return m > 0.0 ? std::sqrt(m) : 0.0;
}

double w_kernel(double w1, double w3, double w4) {
  if (!(w1 > 0.0)) throw std::domain_error("w_kernel: w1 must be positive");
  return phi(w1, w3 + w4 - w1, w3, w4) / std::sqrt(w1);
}

std::array<double, 3> order_triple(double a, double b, double c) {
  std::array<double, 3> r{a, b, c};
  if (r[0] < r[1]) std::swap(r[0], r[1]);
  if (r[1] < r[2]) std::swap(r[1], r[2]);
  if (r[0] < r[1]) std::swap(r[0], r[1]);
  return r;
}

H12 h1_h2(const std::function<double(double)>& f, double a, double b,
          double c) {
  auto [wp, w0, wm] = order_triple(a, b, c);
  H12 h;
  h.h1 = f(wp + wm - w0) + f(wp + w0 - wm) - 2.0 * f(wp);
  h.h2 = f(wp) + f(w0 + wm - wp) - f(w0) - f(wm);
  return h;
}

namespace {
// One ordered term H_f(x,y;z) * Phi_sigma(x,y,z,x+y-z); the kernel is checked
// first so f is never sampled at arguments below sigma's cutoff.
inline double hphi_term(double sigma, const std::function<double(double)>& f,
                        double x, double y, double z) {
  double w4 = x + y - z;
  double p = phi_sigma(sigma, x, y, z, w4);
  if (p == 0.0) return 0.0;
  return p * (f(z) + f(w4) - f(x) - f(y));
}
}  // namespace

double g_sigma_phi(double sigma, const std::function<double(double)>& f,
                   double w1, double w2, double w3) {
  // H and Phi are symmetric in the first two slots, so the six permutations
  // collapse to three distinct terms.
  return (hphi_term(sigma, f, w1, w2, w3) + hphi_term(sigma, f, w1, w3, w2) +
          hphi_term(sigma, f, w2, w3, w1)) /
         3.0;
}

double g0_reduced(const std::function<double(double)>& f, double w1, double w2,
                  double w3) {
  auto [wp, w0, wm] = order_triple(w1, w2, w3);
  H12 h = h1_h2(f, wp, w0, wm);
  double low = w0 + wm - wp;
  double second = low > 0.0 ? std::sqrt(low) * h.h2 : 0.0;
  return (std::sqrt(wm) * h.h1 + second) / 3.0;
}

double delta_phi_sigma(double sigma, const std::function<double(double)>& f,
                       double w1, double w2, double w3) {
  const double kZero = 1e-30;
  // second-smallest coordinate: the two-zero lines are genuine zeros of the
  // extension
  double lo = std::min(w1, std::min(w2, w3));
  double hi = std::max(w1, std::max(w2, w3));
  double mid = w1 + w2 + w3 - lo - hi;
  if (mid < kZero) return 0.0;
  double w4 = w1 + w2 - w3;
  if (w4 < 0.0) return 0.0;
  if (lo < kZero) {
    // exactly one coordinate at zero: for sigma > 0 the kernel vanishes on a
    // neighbourhood; for sigma = 0 the ratio Phi/sqrt(w1 w2 w3) tends to
    // 1/sqrt(product of the other two)
    if (sigma > 0.0) return 0.0;
    double prod = (w1 <= lo) ? w2 * w3 : (w2 <= lo) ? w1 * w3 : w1 * w2;
    return (f(w4) + f(w3) - f(w1) - f(w2)) / std::sqrt(prod);
  }
  double p = phi_sigma(sigma, w1, w2, w3, w4);
  if (p == 0.0) return 0.0;
  return p / std::sqrt(w1 * w2 * w3) * (f(w4) + f(w3) - f(w1) - f(w2));
}

}  // namespace wke
