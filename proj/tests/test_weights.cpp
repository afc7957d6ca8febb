#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "gsp/weights.hpp"

using namespace gsp;

TEST_CASE("preset weights evaluate to their closed forms") {
  Weight c = parse_weight("const:2.5");
  CHECK(c(0.0) == doctest::Approx(2.5));
  CHECK(c(7.0) == doctest::Approx(2.5));
  CHECK(c.tail.cls == TailClass::Constant);

  Weight e = parse_weight("exp:0.5");
  CHECK(e(2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(e.tail.cls == TailClass::Exponential);
  CHECK(e.tail.rate == doctest::Approx(0.5));

  Weight p = parse_weight("pow:2");
  CHECK(p(3.0) == doctest::Approx(1.0 / 16.0).epsilon(1e-15));
  CHECK(p.tail.cls == TailClass::Power);

  const double s3 = std::sqrt(3.0);
  Weight gf = parse_weight("gauss-paper-f");
  CHECK(gf(0.0) == doctest::Approx(std::exp(-1.5)).epsilon(1e-15));
  CHECK(gf(1.0) ==
        doctest::Approx(std::exp(-0.5 * (1.0 + s3) * (1.0 + s3))).epsilon(1e-15));

  // g = f'' for the paper's gaussian pair: (u^2 - 1) exp(-u^2/2), u = t + sqrt(3)
  Weight gg = parse_weight("gauss-paper-g");
  CHECK(gg(0.0) == doctest::Approx(2.0 * std::exp(-1.5)).epsilon(1e-14));
  CHECK(gg(1.0) == doctest::Approx(((1.0 + s3) * (1.0 + s3) - 1.0) *
                                   std::exp(-0.5 * (1.0 + s3) * (1.0 + s3)))
                       .epsilon(1e-14));
}

TEST_CASE("weight spec parse failures") {
  CHECK_THROWS_AS(parse_weight("const"), WeightParameterError);
  CHECK_THROWS_AS(parse_weight("exp:abc"), WeightParameterError);
  CHECK_THROWS_AS(parse_weight("nosuch:1"), WeightParameterError);
  CHECK_THROWS_AS(parse_weight("const:-1"), WeightParameterError);
  CHECK_THROWS_AS(parse_weight("exp:-0.5"), WeightParameterError);
}

TEST_CASE("table weight interpolates and rejects malformed files") {
  const char* path = "test_weight_table.tmp";
  {
    std::ofstream out(path);
    out << "# comment line\n0 1.0\n1, 0.8\n2 0.5\n4 0.5\n";
  }
  Weight w = load_table_weight(path);
  CHECK(w(0.0) == doctest::Approx(1.0));
  CHECK(w(0.5) == doctest::Approx(0.9));
  CHECK(w(3.0) == doctest::Approx(0.5));
  CHECK(w(100.0) == doctest::Approx(0.5));  // constant tail
  CHECK(w.tail.cls == TailClass::Constant);
  CHECK(w.tail.level == doctest::Approx(0.5));

  {
    std::ofstream out(path);
    out << "0 1.0\n1 1.2\n";  // increasing values
  }
  CHECK_THROWS_AS(load_table_weight(path), WeightFormatError);
  {
    std::ofstream out(path);
    out << "0.5 1.0\n1 0.9\n";  // does not start at 0
  }
  CHECK_THROWS_AS(load_table_weight(path), WeightFormatError);
  {
    std::ofstream out(path);
    out << "0 1.0\n1 junk\n";
  }
  CHECK_THROWS_AS(load_table_weight(path), WeightFormatError);
  std::remove(path);
}

TEST_CASE("validate_weight flags increasing or non-positive functions") {
  Weight ok = parse_weight("exp:1");
  CHECK(validate_weight(ok, 10.0, 1000).pass());

  Weight bad = ok;
  bad.eval = [](double t) { return 1.0 + t; };
  WeightValidation v = validate_weight(bad, 10.0, 1000);
  CHECK_FALSE(v.pass());
  CHECK_FALSE(v.nonincreasing);

  Weight neg = ok;
  neg.eval = [](double t) { return 1.0 - t; };
  v = validate_weight(neg, 10.0, 1000);
  CHECK_FALSE(v.pass());
  CHECK_FALSE(v.positive);
  REQUIRE(v.offending_t.has_value());
  CHECK(*v.offending_t > 1.0);
}
