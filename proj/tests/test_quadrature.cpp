#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gsp/quadrature.hpp"

using namespace gsp;

TEST_CASE("gk15 is exact on low-degree polynomials") {
  auto res = gk15([](double t) { return 3.0 * t * t; }, 0.0, 2.0);
  CHECK(res.value == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(res.error < 1e-12);

  res = gk15([](double t) { return std::pow(t, 7.0); }, -1.0, 3.0);
  CHECK(res.value == doctest::Approx((std::pow(3.0, 8.0) - 1.0) / 8.0).epsilon(1e-13));
}

TEST_CASE("gk15_moments matches separate integrals and shares evaluations") {
  double vals[4], errs[4];
  gk15_moments([](double t) { return std::exp(-t); }, 0.5, 2.0, vals, errs, 4);
  for (int j = 0; j < 4; ++j) {
    auto ref = gk15([j](double t) { return std::pow(t, j) * std::exp(-t); },
                    0.5, 2.0);
    CHECK(vals[j] == doctest::Approx(ref.value).epsilon(1e-14));
  }
}

TEST_CASE("adaptive integrate hits tolerance on oscillatory integrands") {
  auto res = integrate([](double t) { return std::sin(10.0 * t); }, 0.0,
                       M_PI, 1e-12);
  CHECK(res.value == doctest::Approx((1.0 - std::cos(10.0 * M_PI)) / 10.0)
                         .epsilon(1e-10));
  CHECK(res.error <= 1e-12);
}

TEST_CASE("integrate throws when the budget is too small") {
  CHECK_THROWS_AS(integrate([](double t) { return std::sin(100.0 * t) /
                                                  (1e-4 + t * t); },
                            0.0, 10.0, 1e-14, 100),
                  QuadratureBudgetError);
}

TEST_CASE("improper integral of exp(-t) converges to 1") {
  auto res = integrate_to_infinity([](double t) { return std::exp(-t); },
                                   1e-10, true);
  CHECK(res.status == TailStatus::Converged);
  CHECK(res.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("improper integral of a power tail converges without certification") {
  auto res = integrate_to_infinity(
      [](double t) { return 1.0 / ((1.0 + t) * (1.0 + t)); }, 1e-9, false);
  CHECK(res.status == TailStatus::Converged);
  CHECK(res.value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("improper integral of a gaussian converges to sqrt(pi)/2") {
  auto res = integrate_to_infinity(
      [](double t) { return std::exp(-t * t); }, 1e-10, false);
  CHECK(res.status == TailStatus::Converged);
  CHECK(res.value == doctest::Approx(0.5 * std::sqrt(M_PI)).epsilon(1e-8));
}

TEST_CASE("divergent tail 1/(1+t) is detected") {
  auto res = integrate_to_infinity(
      [](double t) { return 1.0 / (1.0 + t); }, 1e-8, false);
  CHECK(res.status == TailStatus::Divergent);
}

TEST_CASE("constant tail is detected as divergent") {
  auto res =
      integrate_to_infinity([](double) { return 0.5; }, 1e-8, false);
  CHECK(res.status == TailStatus::Divergent);
}
