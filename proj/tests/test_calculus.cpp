#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gsp/calculus.hpp"

using namespace gsp;

TEST_CASE("moment table reproduces closed-form moments of const and exp") {
  Weight c = parse_weight("const:1");
  MomentTable tc(c, 3, 10.0, 1e-12);
  for (double t : {0.1, 1.0, 4.7, 10.0}) {
    for (int j = 0; j <= 3; ++j)
      CHECK(tc.moment(j, t) ==
            doctest::Approx(std::pow(t, j + 1) / (j + 1)).epsilon(1e-12));
  }

  Weight e = parse_weight("exp:1");
  MomentTable te(e, 1, 20.0, 1e-12);
  for (double t : {0.5, 3.0, 17.0}) {
    CHECK(te.moment(0, t) == doctest::Approx(1.0 - std::exp(-t)).epsilon(1e-12));
    // int_0^t s e^-s ds = 1 - (1+t) e^-t
    CHECK(te.moment(1, t) ==
          doctest::Approx(1.0 - (1.0 + t) * std::exp(-t)).epsilon(1e-12));
  }
}

TEST_CASE("moment table extends its domain in place") {
  Weight e = parse_weight("exp:1");
  MomentTable t(e, 0, 2.0, 1e-12);
  CHECK(t.domain_end() == doctest::Approx(2.0));
  t.extend_to(8.0);
  CHECK(t.domain_end() >= 8.0);
  CHECK(t.moment(0, 7.0) == doctest::Approx(1.0 - std::exp(-7.0)).epsilon(1e-11));
}

TEST_CASE("iterated primitives of const weight are t^k/k!") {
  Weight c = parse_weight("const:1");
  for (int k = 1; k <= 4; ++k) {
    PrimitiveTable p = build_primitive_table(c, k, 6.0, 1e-12);
    double fact = 1.0;
    for (int i = 2; i <= k; ++i) fact *= i;
    for (double t : {0.5, 2.0, 6.0})
      CHECK(p(t) == doctest::Approx(std::pow(t, k) / fact).epsilon(1e-11));
  }
}

TEST_CASE("A-constants of exp(1) are all 1") {
  Weight e = parse_weight("exp:1");
  auto A = compute_A(e, 3);
  REQUIRE(A.size() == 3);
  for (const auto& entry : A) {
    CHECK(entry.state == EntryState::Finite);
    CHECK(entry.value == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("A-constants of the paper's gaussian pair") {
  Weight g = parse_weight("gauss-paper-g");
  auto A = compute_A(g, 2);
  REQUIRE(A.size() == 2);
  CHECK(A[0].state == EntryState::Finite);
  CHECK(A[0].value ==
        doctest::Approx(std::sqrt(3.0) * std::exp(-1.5)).epsilon(1e-8));
  CHECK(A[1].state == EntryState::Finite);
  CHECK(A[1].value == doctest::Approx(std::exp(-1.5)).epsilon(1e-8));
}

TEST_CASE("divergent A_0 for const weight short-circuits the rest") {
  Weight c = parse_weight("const:1");
  auto A = compute_A(c, 3);
  CHECK(A[0].state == EntryState::Divergent);
  CHECK(A[1].state == EntryState::NotEvaluated);
  CHECK(A[2].state == EntryState::NotEvaluated);
}

TEST_CASE("P_k of exp(1) equals e^{-t} for every k") {
  // P_k is the k-fold tail integral of g, so for g = e^{-t} each one is
  // e^{-t} again (positive convention, P_k' = -P_{k-1})
  Weight e = parse_weight("exp:1");
  PFamily p(e, {1.0, 1.0, 1.0});
  for (int k = 0; k <= 3; ++k)
    for (double t : {0.0, 0.7, 2.5, 9.0})
      CHECK(p.eval(k, t) == doctest::Approx(std::exp(-t)).epsilon(1e-7));
}

TEST_CASE("P_2 of the gaussian pair equals the f weight (paper remark)") {
  Weight g = parse_weight("gauss-paper-g");
  Weight f = parse_weight("gauss-paper-f");
  PFamily p(g, {std::sqrt(3.0) * std::exp(-1.5), std::exp(-1.5)});
  for (double t : {0.0, 0.5, 1.5, 3.0, 6.0})
    CHECK(p.eval(2, t) == doctest::Approx(f(t)).epsilon(1e-6));
}

TEST_CASE("sup_ratio finds K_2 = 1 for the gaussian pair") {
  Weight g = parse_weight("gauss-paper-g");
  Weight f = parse_weight("gauss-paper-f");
  PFamily p(g, {std::sqrt(3.0) * std::exp(-1.5), std::exp(-1.5)});
  auto res = sup_ratio([&](double t) { return p.eval(2, t); }, f);
  CHECK(res.state == SupState::Finite);
  CHECK(res.value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("sup_ratio detects divergence of |P_1|/f for the gaussian pair") {
  // P_1 = -(t + sqrt3) exp(-(t+sqrt3)^2/2): the ratio to f grows linearly
  Weight f = parse_weight("gauss-paper-f");
  const double s3 = std::sqrt(3.0);
  auto res = sup_ratio(
      [s3](double t) {
        const double u = t + s3;
        return -u * std::exp(-0.5 * u * u);
      },
      f);
  CHECK(res.state == SupState::Divergent);
}

TEST_CASE("classification: gaussian pair INFINITE for r=1, FINITE for r=2") {
  Weight f = parse_weight("gauss-paper-f");
  Weight g = parse_weight("gauss-paper-g");
  auto r1 = classify_finiteness(f, g, 1);
  CHECK(r1.classification == Finiteness::Infinite);
  auto r2 = classify_finiteness(f, g, 2);
  CHECK(r2.classification == Finiteness::Finite);
  CHECK(r2.K_r.value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("classification: const pair INFINITE, const/exp FINITE") {
  Weight c = parse_weight("const:1");
  Weight e = parse_weight("exp:1");
  CHECK(classify_finiteness(c, c, 2).classification == Finiteness::Infinite);
  auto fin = classify_finiteness(c, e, 2);
  CHECK(fin.classification == Finiteness::Finite);
  CHECK(fin.A[0].value == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(fin.A[1].value == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(fin.K_r.value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("finiteness report serializes to JSON with all entries") {
  Weight c = parse_weight("const:1");
  Weight e = parse_weight("exp:1");
  auto rep = classify_finiteness(c, e, 2);
  const std::string j = rep.to_json();
  CHECK(j.find("\"classification\"") != std::string::npos);
  CHECK(j.find("\"A\"") != std::string::npos);
  CHECK(j.find("\"K_r\"") != std::string::npos);
}
