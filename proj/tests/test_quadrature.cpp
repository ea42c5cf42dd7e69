#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wke/quadrature.hpp"
#include "wke/summation.hpp"

using namespace wke;

TEST_CASE("polynomials are exact, smooth integrands converge tightly") {
  auto r = integrate([](double x) { return x * x; }, 0.0, 1.0);
  CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  auto e = integrate([](double x) { return std::exp(-x); }, 0.0, 30.0);
  CHECK(e.value == doctest::Approx(1.0 - std::exp(-30.0)).epsilon(1e-12));
  CHECK(e.converged);
}

TEST_CASE("breakpoints make kinked integrands cheap") {
  auto f = [](double x) { return std::abs(x - 0.3); };
  auto r = integrate_pts(f, 0.0, 1.0, {0.3});
  // exact: 0.3^2/2 + 0.7^2/2
  CHECK(r.value == doctest::Approx(0.5 * (0.09 + 0.49)).epsilon(1e-14));
}

TEST_CASE("tail map handles algebraic decay") {
  // \int_1^inf x^{-7/6} dx = 6
  auto r = integrate_tail([](double x) { return std::pow(x, -7.0 / 6.0); }, 1.0,
                          7.0 / 6.0);
  CHECK(r.value == doctest::Approx(6.0).epsilon(1e-9));
  // \int_0^inf e^{-x} dx split as head+tail by the a<=0 branch
  auto g = integrate_tail([](double x) { return std::exp(-x); }, 0.0, 3.0);
  CHECK(g.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("origin power substitution removes w^{-s} singularities") {
  // \int_0^1 x^{-2/3} dx = 3
  auto r = integrate_pow0([](double x) { return std::pow(x, -2.0 / 3.0); }, 1.0,
                          2.0 / 3.0);
  CHECK(r.value == doctest::Approx(3.0).epsilon(1e-10));
  // \int_0^4 x^{-1/6} dx = (6/5) 4^{5/6}
  auto r2 = integrate_pow0([](double x) { return std::pow(x, -1.0 / 6.0); }, 4.0,
                           1.0 / 6.0);
  CHECK(r2.value == doctest::Approx(1.2 * std::pow(4.0, 5.0 / 6.0)).epsilon(1e-10));
}

TEST_CASE("iterated 2-d integral") {
  auto outer = [](double x) {
    auto inner = integrate([x](double y) { return x + y; }, 0.0, 1.0);
    return inner.value;
  };
  auto r = integrate(outer, 0.0, 1.0);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("compensated sums survive cancellation and ordering") {
  std::vector<double> xs;
  for (int i = 0; i < 1000; ++i) {
    xs.push_back(1e16);
    xs.push_back(1.0);
    xs.push_back(-1e16);
  }
  CHECK(neumaier_sum(xs) == doctest::Approx(1000.0));
  CHECK(sorted_sum(xs) == doctest::Approx(1000.0));
}

TEST_CASE("parallel_for writes every slot once, any thread count") {
  for (int threads : {1, 2, 5}) {
    std::vector<double> out(257, 0.0);
    parallel_for(out.size(), threads, [&](std::size_t i) { out[i] = 3.0 * i; });
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == 3.0 * i);
  }
}
