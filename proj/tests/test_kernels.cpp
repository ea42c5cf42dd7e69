#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "wke/kernels.hpp"
#include "wke/testfn.hpp"

using namespace wke;

TEST_CASE("phi takes the smallest square root and respects the support cut") {
  CHECK(phi(1, 4, 9, 16) == doctest::Approx(1.0));
  CHECK(phi(4, 4, 4, 4) == doctest::Approx(2.0));
  CHECK(phi(1, 4, 9, -1e-300) == 0.0);
  CHECK(phi(0, 1, 2, 3) == 0.0);
  CHECK(phi_sigma(1.0, 2, 5, 10, 17) == doctest::Approx(1.0));
  CHECK(phi_sigma(0.0, 1, 4, 9, 16) == doctest::Approx(1.0));
  CHECK(phi_sigma(2.0, 1, 4, 9, 16) == 0.0);  // w1 below the cutoff
  // monotone in sigma
  for (double s : {0.0, 0.25, 0.5, 1.0})
    CHECK(phi_sigma(s, 3, 5, 7, 9) >= phi_sigma(s + 0.5, 3, 5, 7, 9));
}

TEST_CASE("w_kernel on-manifold value and domain guard") {
  // quadruple (1, 7, 4, 4): min sqrt is 1, divided by sqrt(1)
  CHECK(w_kernel(1, 4, 4) == doctest::Approx(1.0));
  // w3 + w4 < w1 puts w2 < 0 and kills the kernel
  CHECK(w_kernel(9, 1, 2) == 0.0);
  CHECK_THROWS_AS(w_kernel(0, 1, 1), std::domain_error);
}

TEST_CASE("order_triple sorts descending, ties included") {
  auto r = order_triple(2, 2, 5);
  CHECK(r[0] == 5);
  CHECK(r[1] == 2);
  CHECK(r[2] == 2);
  auto r2 = order_triple(1, 3, 2);
  CHECK(r2[0] == 3);
  CHECK(r2[1] == 2);
  CHECK(r2[2] == 1);
}

TEST_CASE("h1_h2 frozen value for the square on (1,2,3)") {
  // ordered (3,2,1): H1 = f(2)+f(4)-2f(3) = 2, H2 = f(3)+f(0)-f(2)-f(1) = 4
  auto sq = square_fn();
  H12 h = h1_h2(sq.f, 1, 2, 3);
  CHECK(h.h1 == doctest::Approx(2.0));
  CHECK(h.h2 == doctest::Approx(4.0));
  // argument order must not matter
  H12 h2 = h1_h2(sq.f, 3, 1, 2);
  CHECK(h2.h1 == doctest::Approx(h.h1));
  CHECK(h2.h2 == doctest::Approx(h.h2));
}

TEST_CASE("g_sigma_phi: frozen value, symmetry, signs, diagonal") {
  auto sq = square_fn();
  // hand value at (3,2,1), f = w^2:
  //   (1/3)[H(3,2;1)Phi(3,2,1,4) + H(3,1;2)Phi(3,1,2,2) + H(2,1;3)Phi(2,1,3,0)]
  // = (1/3)[4*1 + (-2)*1 + 4*0] = 2/3
  CHECK(g_sigma_phi(0.0, sq.f, 3, 2, 1) == doctest::Approx(2.0 / 3.0));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 5.0);
  auto conv = tent_fn(0.7);
  auto conc = saturating_fn();
  for (int it = 0; it < 200; ++it) {
    double a = U(rng), b = U(rng), c = U(rng);
    double s = (it % 3) * 0.4;
    double g = g_sigma_phi(s, sq.f, a, b, c);
    // permutation symmetry
    CHECK(g_sigma_phi(s, sq.f, b, c, a) == doctest::Approx(g));
    CHECK(g_sigma_phi(s, sq.f, c, b, a) == doctest::Approx(g));
    // convex => nonnegative, concave => nonpositive
    CHECK(g_sigma_phi(s, conv.f, a, b, c) >= -1e-12);
    CHECK(g_sigma_phi(s, sq.f, a, b, c) >= -1e-12);
    CHECK(g_sigma_phi(s, conc.f, a, b, c) <= 1e-12);
    // diagonal is an exact zero
    CHECK(g_sigma_phi(s, sq.f, a, a, a) == 0.0);
  }
}

TEST_CASE("g0_reduced agrees with the symmetrized form at sigma = 0") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 4.0);
  auto sq = square_fn();
  auto tn = tent_fn(0.5);
  auto sb = spline_bump_fn(1.5, 1.0);
  for (int it = 0; it < 300; ++it) {
    double a = U(rng), b = U(rng), c = U(rng);
    for (const auto& fn : {sq, tn, sb}) {
      double full = g_sigma_phi(0.0, fn.f, a, b, c);
      double red = g0_reduced(fn.f, a, b, c);
      CHECK(full == doctest::Approx(red).epsilon(1e-10));
    }
  }
}

TEST_CASE("delta_phi_sigma: support, removable singularities, boundary limits") {
  auto sq = square_fn();
  // kernel support: nothing when w3 > w1 + w2
  CHECK(delta_phi_sigma(0.0, sq.f, 1.0, 2.0, 4.0) == 0.0);
  // two coordinates at zero
  CHECK(delta_phi_sigma(0.0, sq.f, 0.0, 0.0, 1.0) == 0.0);
  CHECK(delta_phi_sigma(0.0, sq.f, 1.0, 0.0, 0.0) == 0.0);
  // one coordinate at zero matches the limit from inside
  double lim = delta_phi_sigma(0.0, sq.f, 0.0, 3.0, 1.0);
  double in = delta_phi_sigma(0.0, sq.f, 1e-13, 3.0, 1.0);
  CHECK(lim == doctest::Approx(in).epsilon(1e-5));
  // the same boundary with the order condition violated vanishes
  CHECK(delta_phi_sigma(0.0, sq.f, 0.0, 1.0, 3.0) == 0.0);
  // positive sigma kills a zero coordinate outright
  CHECK(delta_phi_sigma(0.5, sq.f, 0.0, 3.0, 1.0) == 0.0);
  // plain bulk value against a direct evaluation
  double d = delta_phi_sigma(0.0, sq.f, 2.0, 3.0, 1.0);
  double expect = phi(2, 3, 1, 4) / std::sqrt(6.0) * (16.0 + 1.0 - 4.0 - 9.0);
  CHECK(d == doctest::Approx(expect));
}

TEST_CASE("symmetrization identity on random atomic triples") {
  // sum_{ijk} m3 * Delta_{f,sigma} equals the same sum written through the
  // symmetrized functional G_{sigma,f}/sqrt(w1 w2 w3)
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.1, 4.0);
  auto f = spline_bump_fn(2.0, 1.5);
  for (int rep = 0; rep < 20; ++rep) {
    double x[3] = {U(rng), U(rng), U(rng)};
    double m[3] = {U(rng), U(rng), U(rng)};
    double s = (rep % 2) ? 0.3 : 0.0;
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          double mm = m[i] * m[j] * m[k];
          lhs += mm * delta_phi_sigma(s, f.f, x[i], x[j], x[k]);
          rhs += mm * g_sigma_phi(s, f.f, x[i], x[j], x[k]) /
                 std::sqrt(x[i] * x[j] * x[k]);
        }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
  }
}

TEST_CASE("catalog shapes: ramp is C^1-monotone-concave, bump is compact") {
  // ramp blend: continuity and monotonicity on a fine sweep
  double prev = -1.0;
  for (int i = 0; i <= 3000; ++i) {
    double s = 3.0 * i / 3000.0;
    double q = ramp_q(s);
    CHECK(q >= prev - 1e-15);
    prev = q;
  }
  CHECK(ramp_q(0.5) == doctest::Approx(0.5));
  CHECK(ramp_q(1.5) == doctest::Approx(1.0));
  CHECK(ramp_q(0.3) == doctest::Approx(0.3));
  CHECK(spline_bump(0.0) == doctest::Approx(1.0));
  CHECK(spline_bump(2.0) == 0.0);
  CHECK(spline_bump(-2.1) == 0.0);
}
