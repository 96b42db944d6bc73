#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "modham/precision.hpp"
#include "oracles.hpp"

using namespace modham;
using testing::check_close;

TEST_CASE("context rejects fewer than 30 digits") {
  CHECK_THROWS_AS(PrecisionContext(29), std::invalid_argument);
  CHECK(PrecisionContext(30).bits() >= 166);
}

TEST_CASE("arcoth closed forms") {
  PrecisionContext ctx(100);
  const Real tol = pow10(ctx, -95);
  check_close(arcoth(Real(ctx, 2L)), log(Real(ctx, 3L)) / 2, tol);
  check_close(arcoth(Real(ctx, -2L)), -arcoth(Real(ctx, 2L)), tol);
  CHECK_THROWS_AS(arcoth(Real(ctx, 1L)), DomainError);
  CHECK_THROWS_AS(arcoth(Real::ratio(ctx, 1, 2)), DomainError);
  CHECK_THROWS_AS(arcoth(Real(ctx, -1L)), DomainError);
}

TEST_CASE("arcoth just above one matches an independent series") {
  PrecisionContext ctx(200);
  const Real x = Real(ctx, 1L) + pow10(ctx, -50);
  const Real reference(ctx, oracle::arcoth_one_plus_ten_pow(50, 210));
  // rounding of x (1e-220) times d arcoth/dx (5e49)
  check_close(arcoth(x), reference, pow10(ctx, -165));
}

TEST_CASE("coth inverts arcoth across the domain") {
  PrecisionContext ctx(100);
  const Real tol = pow10(ctx, -90);
  const Real one(ctx, 1L);
  for (const Real& x : {one + pow10(ctx, -29), one + pow10(ctx, -3), Real(ctx, 2L), Real(ctx, 1000L), pow10(ctx, 29),
                        -(one + pow10(ctx, -20)), Real(ctx, -7L)})
    check_close(coth(arcoth(x)), x, tol);
}

TEST_CASE("arcoth is strictly decreasing on (1, inf)") {
  PrecisionContext ctx(60);
  Real previous = arcoth(Real(ctx, 1L) + pow10(ctx, -40));
  for (int k = -30; k <= 30; k += 3) {
    const Real x = Real(ctx, 1L) + pow10(ctx, k);
    const Real y = arcoth(x);
    CHECK(y < previous);
    previous = y;
  }
}

TEST_CASE("elementary functions") {
  PrecisionContext ctx(100);
  const Real tol = pow10(ctx, -98);
  CHECK(elementary(Elementary::kLn, Real(ctx, 1L)).is_zero());
  check_close(elementary(Elementary::kSqrt, Real(ctx, 4L)), Real(ctx, 2L), tol);
  const Real e(ctx, oracle::euler_series(110));
  check_close(elementary(Elementary::kExp, Real(ctx, 1L)), e, tol);
  check_close(pi(ctx), atan(Real(ctx, 1L)) * 4, tol);
  check_close(elementary(Elementary::kSin, pi(ctx) / 6), Real::ratio(ctx, 1, 2), tol);
  check_close(elementary(Elementary::kCos, pi(ctx) / 3), Real::ratio(ctx, 1, 2), tol);
  CHECK_THROWS_AS(elementary(Elementary::kLn, Real(ctx, -1L)), DomainError);
  CHECK_THROWS_AS(elementary(Elementary::kSqrt, Real(ctx, -1L)), DomainError);
  CHECK_THROWS_AS(Real(ctx, 1L) / Real(ctx), DomainError);
}

TEST_CASE("decimal serialization re-reads exactly") {
  PrecisionContext ctx(80);
  for (const Real& x : {pi(ctx), -exp(Real(ctx, 30L)), pow10(ctx, -70) / 3, Real(ctx, 0L)}) {
    const std::string s = x.to_string();
    CHECK(Real(ctx, s) == x);
  }
  CHECK(Real(ctx, "-1.25e-3").to_string(3) == "-1.25e-03");
  CHECK_THROWS_AS(Real(ctx, "1.2.3"), ParseError);
  CHECK_THROWS_AS(Real(ctx, ""), ParseError);
}

TEST_CASE("doubling the digits changes values only below the original precision") {
  PrecisionContext lo(60), hi(120);
  const Real a = arcoth(Real(lo, 1L) + pow10(lo, -20));
  const Real b = arcoth(Real(hi, 1L) + pow10(hi, -20));
  CHECK(abs(a - b) <= pow10(hi, -58));
  CHECK(abs(exp(Real::ratio(lo, 7, 3)) - exp(Real::ratio(hi, 7, 3))) <= pow10(hi, -58));
}

TEST_CASE("arithmetic is deterministic") {
  PrecisionContext ctx(90);
  auto run = [&] { return (arcoth(Real::ratio(ctx, 11, 10)) * pi(ctx) / sqrt(Real(ctx, 2L))).to_string(); };
  CHECK(run() == run());
}
