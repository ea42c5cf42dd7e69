#pragma once
#include <functional>
#include <string>
#include <vector>

namespace wke {

// Test functions used to pair against measures.  The convexity tag is what
// the monotonicity checks key on; affine entries double as the conserved
// moments (mass, energy).
struct TestFn {
  std::string name;
  std::function<double(double)> f;
  int convexity = 0;  // +1 convex, -1 concave, 0 mixed / not classified
  bool affine = false;
  double operator()(double w) const { return f(w); }
};

TestFn affine_fn(double c0, double c1);     // c0 + c1*w
TestFn tent_fn(double K);                   // (1 - K w)_+        convex
TestFn square_fn();                         // w^2                convex
TestFn saturating_fn();                     // w/(1+w)            concave
TestFn ramp_bump_fn(double R);              // R * Q(w/R)         concave
TestFn spline_bump_fn(double center, double halfwidth);  // C^2, compact

// C^2 ramp: Q(s) = s on [0,1/2], 1 for s >= 3/2, quintic blend between
// (monotone, Q'' <= 0 throughout).
double ramp_q(double s);
double spline_bump(double u);  // normalized cubic B-spline bump, supp [-2,2], peak 1

// mass, energy, two tents, square, saturating, ramp bump, one spline bump
std::vector<TestFn> default_catalog();

}  // namespace wke
