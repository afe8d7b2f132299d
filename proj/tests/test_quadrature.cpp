// ndrstats
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "ndr/errors.hpp"
#include "ndr/quadrature.hpp"

using ndr::ConvergenceError;
using ndr::DomainError;
using ndr::integrate;

TEST_CASE("polynomials up to degree 13 are exact on a single panel") {
  // 7-point Gauss is exact through degree 13, so the error estimate is
  // rounding-level and no subdivision should occur.
  auto poly = [](double x) {
    const double x2 = x * x;
    return ((3.0 * x2 - 2.0) * x2 + 5.0) * x2 * x2 * x2 * x2 * x - 4.0;
  };
  // antiderivative of 3x^13 - 2x^11 + 5x^9 - 4 over [0, 2]
  const double truth = 3.0 * 16384.0 / 14.0 - 2.0 * 4096.0 / 12.0 +
                       5.0 * 1024.0 / 10.0 - 8.0;
  const auto r = integrate(poly, 0.0, 2.0);
  CHECK(r.value == doctest::Approx(truth).epsilon(1e-14));
  CHECK(r.subdivisions == 0);
}

TEST_CASE("smooth integrands hit the requested tolerance") {
  const auto exp_r = integrate([](double x) { return std::exp(-x); }, 0.0, 1.0);
  CHECK(std::abs(exp_r.value - (1.0 - std::exp(-1.0))) <= 1e-12);

  const auto sin_r = integrate([](double x) { return std::sin(x); }, 0.0, M_PI);
  CHECK(std::abs(sin_r.value - 2.0) <= 1e-12);
  CHECK(sin_r.error_estimate >= 0.0);

  const auto osc =
      integrate([](double x) { return std::cos(7.0 * x) * std::cos(7.0 * x); },
                0.0, 2.0 * M_PI, 1e-12);
  CHECK(std::abs(osc.value - M_PI) <= 1e-10);
}

TEST_CASE("a sharp peak forces subdivision but still converges") {
  const double s = 0.005;
  auto peak = [s](double x) {
    const double t = (x - 0.5) / s;
    return std::exp(-0.5 * t * t) / (s * std::sqrt(2.0 * M_PI));
  };
  const auto r = integrate(peak, 0.0, 1.0, 1e-11);
  // the mass outside [0, 1] is erfc(0.5 / (s sqrt 2)), i.e. zero in doubles
  CHECK(std::abs(r.value - 1.0) <= 1e-9);
  CHECK(r.subdivisions > 4);
}

TEST_CASE("tolerance halving keeps the total error budget honest") {
  auto f = [](double x) { return 1.0 / (1.0 + x * x); };
  const auto r = integrate(f, 0.0, 1.0, 1e-13);
  CHECK(std::abs(r.value - M_PI / 4.0) <= 1e-13);
  CHECK(r.error_estimate <= 1e-12);
}

TEST_CASE("integrable endpoint singularity exhausts the refinement depth") {
  auto f = [](double x) { return 1.0 / std::sqrt(x); };
  try {
    integrate(f, 0.0, 1.0, 1e-12);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.steps() > 60);
    CHECK(e.residual() > 0.0);
  }
}

TEST_CASE("argument validation") {
  auto f = [](double x) { return x; };
  CHECK_THROWS_AS(integrate(f, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(integrate(f, 2.0, 1.0), DomainError);
  CHECK_THROWS_AS(integrate(f, 0.0, INFINITY), DomainError);
  CHECK_THROWS_AS(integrate(f, std::nan(""), 1.0), DomainError);
  CHECK_THROWS_AS(integrate(f, 0.0, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(integrate(f, 0.0, 1.0, 1e-10, -1.0), DomainError);
}
