#include <doctest.h>

#include <cmath>
#include <limits>

#include "draftval/error.hpp"
#include "draftval/model.hpp"

using namespace draftval;

namespace {

// 40-digit mpmath evaluations of the curve at the L2 "with CI" parameters.
constexpr double kV10 = 0.3239947028733868190979248947421945478094;
constexpr double kDeltaP1 = -0.8783178954382153983376642064284873298161;
constexpr double kDeltaP2 = -0.3288732222662355253563816450223471902024;
constexpr double kV2AtL1 = 0.9989935068543516131796027358031721157925;

const CurveParams kWithCi(0.030773, 1.638750);

}  // namespace

TEST_CASE("pick number range") {
  CHECK(PickNumber(1).value() == 1);
  CHECK(PickNumber(1024).value() == 1024);
  CHECK_THROWS_AS(PickNumber(0), Error);
  CHECK_THROWS_AS(PickNumber(1025), Error);
  CHECK_THROWS_AS(PickNumber(-5), Error);
  CHECK(PickNumber(3) < PickNumber(4));
}

TEST_CASE("curve params validation") {
  CHECK_NOTHROW(CurveParams(0.0, 1.0));
  CHECK_THROWS_AS(CurveParams(-1e-12, 1.0), Error);
  CHECK_THROWS_AS(CurveParams(0.1, 0.0), Error);
  CHECK_THROWS_AS(CurveParams(std::nan(""), 1.0), Error);
  CHECK_THROWS_AS(CurveParams(0.1, std::numeric_limits<double>::infinity()), Error);
  try {
    CurveParams(-1.0, 1.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
  }
}

TEST_CASE("norm order") {
  CHECK(NormOrder::l1().value() == 1.0);
  CHECK(NormOrder::l2().value() == 2.0);
  CHECK_THROWS_AS(NormOrder(0.5), Error);
  CHECK_THROWS_AS(NormOrder(std::nan("")), Error);
}

TEST_CASE("trade side rejects empty and duplicate picks") {
  CHECK_THROWS_AS(TradeSide({}), Error);
  CHECK_THROWS_AS(make_side({5, 9, 5}), Error);
  const TradeSide s = make_side({14, 3, 77});
  REQUIRE(s.size() == 3);
  CHECK(s.picks()[0].value() == 14);
  CHECK(s.picks()[2].value() == 77);
  CHECK(s.contains(PickNumber(3)));
  CHECK_FALSE(s.contains(PickNumber(4)));
}

TEST_CASE("pick values against high-precision references") {
  CHECK(pick_value(PickNumber(1), kWithCi) == 1.0);
  CHECK(pick_value(PickNumber(10), kWithCi) == doctest::Approx(kV10).epsilon(1e-14));
  CHECK(pick_value(PickNumber(10), kWithCi) == doctest::Approx(0.324).epsilon(1e-3));
  CHECK(pick_value(PickNumber(2), CurveParams(0.001007, 1.445350)) ==
        doctest::Approx(kV2AtL1).epsilon(1e-15));
  CHECK(pick_value(PickNumber(2), CurveParams(0.001007, 1.445350)) ==
        doctest::Approx(0.9989935).epsilon(1e-7));
  CHECK(pick_value(PickNumber(500), CurveParams(0.0, 2.0)) == 1.0);
}

TEST_CASE("trade delta references") {
  const Trade t{make_side({1}), make_side({2, 3}), 2020, "x"};
  CHECK(trade_delta(t, kWithCi, NormOrder::l1()) == doctest::Approx(kDeltaP1).epsilon(1e-14));
  CHECK(trade_delta(t, kWithCi, NormOrder::l1()) == doctest::Approx(-0.8783).epsilon(1e-4));
  CHECK(trade_delta(t, kWithCi, NormOrder::l2()) == doctest::Approx(kDeltaP2).epsilon(1e-14));
  CHECK(trade_delta(t.swapped(), kWithCi, NormOrder::l1()) == -trade_delta(t, kWithCi, NormOrder::l1()));
}

TEST_CASE("side value special and general norms") {
  const TradeSide s = make_side({1, 5, 20});
  const CurveParams c(0.05, 1.2);
  const double a = pick_value(PickNumber(1), c);
  const double b = pick_value(PickNumber(5), c);
  const double d = pick_value(PickNumber(20), c);
  CHECK(side_value(s, c, NormOrder::l1()) == doctest::Approx(a + b + d).epsilon(1e-15));
  CHECK(side_value(s, c, NormOrder::l2()) ==
        doctest::Approx(std::sqrt(a * a + b * b + d * d)).epsilon(1e-15));
  CHECK(side_value(s, c, NormOrder(3.0)) ==
        doctest::Approx(std::cbrt(a * a * a + b * b * b + d * d * d)).epsilon(1e-14));
}
