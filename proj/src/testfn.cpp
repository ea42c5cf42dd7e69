#include "wke/testfn.hpp"

#include <algorithm>
#include <cmath>

namespace wke {

double ramp_q(double s) {
  if (s <= 0.5) return std::max(s, 0.0);
  if (s >= 1.5) return 1.0;
  // quintic with value/slope/curvature matched at both ends:
  // p(u) = 1/2 + u - u^3 + u^4/2,  p'(u) = (1-u)^2 (1+2u) >= 0,  p'' = 6u(u-1) <= 0
  double u = s - 0.5;
  return 0.5 + u - u * u * u + 0.5 * u * u * u * u;
}

double spline_bump(double u) {
  double a = std::abs(u);
  if (a >= 2.0) return 0.0;
  double v;
  if (a <= 1.0)
    v = (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0;
  else
    v = (2.0 - a) * (2.0 - a) * (2.0 - a) / 6.0;
  return 1.5 * v;  // peak normalized to 1
}

TestFn affine_fn(double c0, double c1) {
  TestFn t;
  t.name = "affine(" + std::to_string(c0) + "," + std::to_string(c1) + ")";
  t.f = [c0, c1](double w) { return c0 + c1 * w; };
  t.affine = true;
  return t;
}

TestFn tent_fn(double K) {
  TestFn t;
  t.name = "tent(K=" + std::to_string(K) + ")";
  t.f = [K](double w) { return std::max(1.0 - K * w, 0.0); };
  t.convexity = +1;
  return t;
}

TestFn square_fn() {
  TestFn t;
  t.name = "square";
  t.f = [](double w) { return w * w; };
  t.convexity = +1;
  return t;
}

TestFn saturating_fn() {
  TestFn t;
  t.name = "saturating";
  t.f = [](double w) { return w / (1.0 + w); };
  t.convexity = -1;
  return t;
}

TestFn ramp_bump_fn(double R) {
  TestFn t;
  t.name = "ramp_bump(R=" + std::to_string(R) + ")";
  t.f = [R](double w) { return R * ramp_q(w / R); };
  t.convexity = -1;
  return t;
}

TestFn spline_bump_fn(double center, double halfwidth) {
  TestFn t;
  t.name = "spline_bump(" + std::to_string(center) + "," + std::to_string(halfwidth) + ")";
  t.f = [center, halfwidth](double w) { return spline_bump((w - center) / halfwidth); };
  return t;
}

std::vector<TestFn> default_catalog() {
  std::vector<TestFn> cat;
  cat.push_back(affine_fn(1.0, 0.0));  // mass
  cat.push_back(affine_fn(0.0, 1.0));  // energy
  cat.push_back(tent_fn(1.0));
  cat.push_back(tent_fn(0.25));
  cat.push_back(square_fn());
  cat.push_back(saturating_fn());
  cat.push_back(ramp_bump_fn(4.0));
  cat.push_back(spline_bump_fn(1.0, 0.5));
  return cat;
}

}  // namespace wke
