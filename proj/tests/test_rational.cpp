#include <doctest.h>

#include "margulis/rational.hpp"

using namespace margulis;

TEST_CASE("rational parsing round-trips") {
  CHECK(rat_to_string(rat_from_string("3/6")) == "1/2");
  CHECK(rat_to_string(rat_from_string("-4")) == "-4");
  CHECK_THROWS_AS(rat_from_string("x"), std::invalid_argument);
}

TEST_CASE("linear solve and inverse") {
  RatMat a = {{Rat(2), Rat(1)}, {Rat(1), Rat(3)}};
  auto x = solve_linear(a, {Rat(5), Rat(10)});
  REQUIRE(x.has_value());
  CHECK((*x)[0] == Rat(1));
  CHECK((*x)[1] == Rat(3));
  const RatMat inv = invert(a);
  CHECK(matmul(a, inv) == rm_identity(2));

  // inconsistent system
  RatMat b = {{Rat(1), Rat(1)}, {Rat(2), Rat(2)}};
  CHECK_FALSE(solve_linear(b, {Rat(1), Rat(3)}).has_value());
}

TEST_CASE("exact convex hull membership by LP") {
  // unit square in the plane
  std::vector<RatVec> square = {{Rat(0), Rat(0)}, {Rat(1), Rat(0)}, {Rat(0), Rat(1)}, {Rat(1), Rat(1)}};
  CHECK(in_convex_hull_lp(square, {Rat(1, 2), Rat(1, 2)}));
  CHECK(in_convex_hull_lp(square, {Rat(1), Rat(1)}));          // vertex
  CHECK(in_convex_hull_lp(square, {Rat(1), Rat(1, 2)}));       // edge midpoint
  CHECK_FALSE(in_convex_hull_lp(square, {Rat(1), Rat(1001, 1000)}));
  CHECK_FALSE(in_convex_hull_lp(square, {Rat(-1, 1000000), Rat(0)}));
}
