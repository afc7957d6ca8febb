#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gsp/extremal.hpp"

using namespace gsp;

namespace {

double chebyshev_phi(int r, double a) {
  // phi_{r,0}(a) = a^r / (r! 2^{2r-1}) = 2 (a/4)^r for const weights
  double fact = 1.0;
  for (int i = 2; i <= r; ++i) fact *= i;
  return std::pow(a, r) / (fact * std::pow(2.0, 2 * r - 1));
}

}  // namespace

TEST_CASE("knotless const solves match the Chebyshev closed form") {
  Weight c = parse_weight("const:1");
  for (int r : {1, 2, 3, 4})
    for (double a : {1.0, 2.0, 4.0}) {
      auto res = solve_extremal(c, c, r, 0, a);
      CHECK(res.deviation ==
            doctest::Approx(chebyshev_phi(r, a)).epsilon(1e-6));
      CHECK(res.certificate.ok);
    }
}

TEST_CASE("r=1 extremal is the midrange of the primitive") {
  Weight c = parse_weight("const:1");
  auto res = solve_extremal(c, c, 1, 0, 2.0);
  CHECK(res.deviation == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(res.spline.knots().empty());
  CHECK(res.spline.eval(0, 2.0) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("certificates hold across (r,n) and weights") {
  Weight c = parse_weight("const:1");
  Weight e = parse_weight("exp:1");
  struct Case {
    int r, n;
  };
  for (Case q : {Case{2, 1}, Case{2, 3}, Case{3, 2}}) {
    for (const Weight& g : {c, e}) {
      auto res = solve_extremal(c, g, q.r, q.n, 4.0);
      INFO("r=", q.r, " n=", q.n, " g=", g.kind, " : ", res.certificate.failure);
      CHECK(res.certificate.ok);
      CHECK(static_cast<int>(res.certificate.certificate.points.size()) ==
            q.n + q.r + 1);
      CHECK(res.certificate.certificate.points.back() == doctest::Approx(4.0));
    }
  }
}

TEST_CASE("last alternation sign is positive (normalization)") {
  Weight c = parse_weight("const:1");
  for (int n : {0, 1, 2}) {
    auto res = solve_extremal(c, c, 2, n, 4.0);
    REQUIRE(res.certificate.ok);
    CHECK(res.certificate.certificate.signs.back() == 1);
    CHECK(res.spline.eval(0, 4.0) > 0.0);
  }
}

TEST_CASE("scaling equivariance of the const problem") {
  // G_{lambda a}(t) = lambda^r G_a(t/lambda) => phi scales by lambda^r
  Weight c = parse_weight("const:1");
  const double lam = 1.7;
  for (int r : {2, 3}) {
    auto base = solve_extremal(c, c, r, 2, 3.0);
    auto scaled = solve_extremal(c, c, r, 2, 3.0 * lam);
    CHECK(scaled.deviation ==
          doctest::Approx(base.deviation * std::pow(lam, r)).epsilon(1e-7));
    for (std::size_t i = 0; i < base.spline.knots().size(); ++i)
      CHECK(scaled.spline.knots()[i] ==
            doctest::Approx(base.spline.knots()[i] * lam).epsilon(1e-6));
  }
}

TEST_CASE("phi increases with a (monotonicity of the deviation)") {
  Weight c = parse_weight("const:1");
  struct Pair {
    const char* f;
    const char* g;
  };
  for (Pair p : {Pair{"const:1", "const:1"}, Pair{"const:1", "exp:1"},
                 Pair{"exp:0.5", "const:1"}, Pair{"pow:2", "exp:0.5"},
                 Pair{"gauss-paper-f", "gauss-paper-g"}}) {
    Weight f = parse_weight(p.f);
    Weight g = parse_weight(p.g);
    auto curve = phi_curve(f, g, 2, 1, 0.5, 4.0, 10);
    for (std::size_t i = 1; i < curve.size(); ++i) {
      INFO(p.f, " / ", p.g, " at a=", curve[i].a);
      CHECK(curve[i].value > curve[i - 1].value);
    }
  }
}

TEST_CASE("solve_a_for_delta inverts phi") {
  Weight c = parse_weight("const:1");
  for (int n : {0, 1, 2}) {
    auto res = solve_a_for_delta(c, c, 2, n, 1.0);
    CHECK(res.solve.deviation == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(phi(c, c, 2, n, res.a) == doctest::Approx(1.0).epsilon(1e-6));
  }
  // closed form for n = 0: a = 4 sqrt(delta)
  auto res = solve_a_for_delta(c, c, 2, 0, 2.25);
  CHECK(res.a == doctest::Approx(6.0).epsilon(1e-6));
}

TEST_CASE("solve_a_for_delta reports saturation in the FINITE regime") {
  // phi_{2,0}(a) for f=const(1), g=exp(1) saturates at 1/2 < 2
  Weight c = parse_weight("const:1");
  Weight e = parse_weight("exp:1");
  try {
    solve_a_for_delta(c, e, 2, 0, 2.0, 1.0, 1e4);
    FAIL("expected RangeError");
  } catch (const RangeError& err) {
    CHECK(err.achieved_sup < 0.55);
    CHECK(err.achieved_sup > 0.4);
  }
}

TEST_CASE("strict mode agrees with the default initialization") {
  Weight c = parse_weight("const:1");
  Weight e = parse_weight("exp:1");
  ExtremalConfig cfg;
  cfg.strict = true;
  auto res = solve_extremal(c, e, 2, 2, 4.0, cfg);
  CHECK(res.certificate.ok);
}

TEST_CASE("invalid parameters are rejected") {
  Weight c = parse_weight("const:1");
  CHECK_THROWS_AS(solve_extremal(c, c, 0, 0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_extremal(c, c, 2, -1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_extremal(c, c, 2, 0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_a_for_delta(c, c, 2, 0, -1.0), std::invalid_argument);
}

TEST_CASE("Rolle cascade: G^(s) has n + r - s sign changes") {
  Weight c = parse_weight("const:1");
  Weight e = parse_weight("exp:1");
  struct Case {
    int r, n;
  };
  for (Case q : {Case{2, 2}, Case{3, 1}, Case{3, 3}}) {
    for (const Weight& g : {c, e}) {
      auto res = solve_extremal(c, g, q.r, q.n, 5.0);
      REQUIRE(res.certificate.ok);
      for (int s = 0; s <= q.r; ++s) {
        INFO("r=", q.r, " n=", q.n, " s=", s, " g=", g.kind);
        CHECK(count_sign_changes(res.spline, s, 8192) == q.n + q.r - s);
      }
    }
  }
}

TEST_CASE("derivative sign cascade at zero") {
  Weight c = parse_weight("const:1");
  Weight e = parse_weight("exp:1");
  struct Case {
    int r, n;
  };
  for (Case q : {Case{2, 0}, Case{2, 2}, Case{3, 1}, Case{4, 1}}) {
    for (const Weight& g : {c, e}) {
      auto res = solve_extremal(c, g, q.r, q.n, 4.0);
      for (int s = 0; s < q.r; ++s) {
        const double lo = res.spline.eval(s, 0.0);
        const double hi = res.spline.eval(s + 1, 0.0);
        INFO("r=", q.r, " n=", q.n, " s=", s, " g=", g.kind);
        CHECK(lo * hi < 0.0);
      }
    }
  }
}

TEST_CASE("knots at fixed deviation shrink as n grows") {
  Weight c = parse_weight("const:1");
  std::vector<std::vector<double>> knots;
  std::vector<double> lengths;
  for (int n = 0; n <= 4; ++n) {
    auto res = solve_a_for_delta(c, c, 2, n, 1.0);
    knots.push_back(res.solve.spline.knots());
    lengths.push_back(res.a);
  }
  for (int n = 1; n <= 4; ++n) {
    CHECK(lengths[static_cast<std::size_t>(n)] >
          lengths[static_cast<std::size_t>(n - 1)]);  // delta_{r,n} grows
    // for const weights the shared knots coincide exactly (the spline is
    // periodic away from the ends), so the comparison is non-strict
    if (n >= 2)
      for (std::size_t i = 0; i < knots[static_cast<std::size_t>(n - 1)].size(); ++i)
        CHECK(knots[static_cast<std::size_t>(n)][i] <=
              knots[static_cast<std::size_t>(n - 1)][i] + 1e-7);
  }
}

TEST_CASE("warm starts reproduce cold-start deviations") {
  Weight c = parse_weight("const:1");
  auto cold = solve_extremal(c, c, 2, 3, 5.0);
  ExtremalConfig cfg;
  cfg.initial_knots = cold.spline.knots();
  cfg.warm_reference = cold.alternation_points;
  auto warm = solve_extremal(c, c, 2, 3, 5.0, cfg);
  CHECK(warm.deviation == doctest::Approx(cold.deviation).epsilon(1e-9));
  CHECK(warm.residual_evaluations <= cold.residual_evaluations);
}
