#pragma once
#include <array>
#include <functional>

namespace wke {

// Collision kernel: min of the four square roots, zero as soon as any
// argument is negative.  The regularized version shifts every argument by
// sigma before the positive part.
double phi(double w1, double w2, double w3, double w4);
double phi_sigma(double sigma, double w1, double w2, double w3, double w4);

// Kernel of the frequency-space collision integral at (w1; w3, w4) with
// w2 = w3 + w4 - w1 on the resonance manifold.  Throws on w1 <= 0.
double w_kernel(double w1, double w3, double w4);

// (w_plus, w_mid, w_minus), descending
std::array<double, 3> order_triple(double a, double b, double c);

// Second differences of a test function along the two collision channels of
// an ordered triple:
//   H1 = f(w+ + w- - w0) + f(w+ + w0 - w-) - 2 f(w+)
//   H2 = f(w+) + f(w0 + w- - w+) - f(w0) - f(w-)
struct H12 {
  double h1, h2;
};
H12 h1_h2(const std::function<double(double)>& f, double a, double b, double c);

// Symmetrized collision functional
//   G_{sigma,f}(w1,w2,w3) = (1/6) sum_{perm} H_f(x,y;z) Phi_sigma(x,y,z,x+y-z)
// with H_f(x,y;z) = f(z) + f(x+y-z) - f(x) - f(y).  Nonnegative for convex f,
// nonpositive for concave f, zero on the diagonal.
double g_sigma_phi(double sigma, const std::function<double(double)>& f,
                   double w1, double w2, double w3);

// Closed form of G_{0,f} in terms of the ordered triple:
//   (1/3) [ sqrt(w-) H1 + sqrt((w0 + w- - w+)_+) H2 ]
double g0_reduced(const std::function<double(double)>& f, double w1, double w2,
                  double w3);

// Weak-form integrand
//   Delta_{f,sigma}(w1,w2,w3) =
//     Phi_sigma(w1,w2,w3,w1+w2-w3)/sqrt(w1 w2 w3) *
//     [ f(w1+w2-w3) + f(w3) - f(w1) - f(w2) ]
// extended continuously where coordinates vanish: the value is 0 whenever two
// of the coordinates are zero, and the one-zero limits carry the boundary
// (condensate) interactions.
double delta_phi_sigma(double sigma, const std::function<double(double)>& f,
                       double w1, double w2, double w3);

}  // namespace wke
