#include <doctest.h>

#include <cmath>
#include <random>

#include "chain_census/geometry.hpp"

using namespace chain_census;

namespace {

Point ex(std::initializer_list<Rational> c) { return Point::exact(std::vector<Rational>(c)); }
Point fl(std::initializer_list<double> c) { return Point::floating(std::vector<double>(c)); }

}  // namespace

TEST_CASE("squared distance examples") {
  CHECK(squared_distance_exact(ex({0, 0}), ex({0, 0})) == Rational(0));
  CHECK(squared_distance_exact(ex({0, 0}), ex({Rational(3, 5), Rational(4, 5)})) == Rational(1));
  CHECK(squared_distance_exact(ex({Rational(1, 2), Rational(1, 2), 0, 0}),
                               ex({0, 0, Rational(1, 2), Rational(1, 2)})) == Rational(1));
  CHECK_THROWS_AS(squared_distance(ex({0, 0}), ex({0, 0, 0})), DimensionMismatch);
  CHECK(std::holds_alternative<double>(squared_distance(ex({0, 0}), fl({1.0, 0.0}))));
}

TEST_CASE("squared distance symmetric and nonnegative") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<long> num(-20, 20), den(1, 9);
  for (int i = 0; i < 300; ++i) {
    const Point p = ex({Rational(num(rng), den(rng)), Rational(num(rng), den(rng))});
    const Point q = ex({Rational(num(rng), den(rng)), Rational(num(rng), den(rng))});
    const Rational a = squared_distance_exact(p, q);
    CHECK(a == squared_distance_exact(q, p));
    CHECK(a.sign() >= 0);
    CHECK((a.is_zero() == (p == q)));
  }
}

TEST_CASE("matches_distance in both modes") {
  const auto exact = ComparisonMode::exact();
  CHECK(matches_distance(ex({0, 0}), ex({Rational(3, 5), Rational(4, 5)}), Rational(1), exact));
  CHECK_FALSE(matches_distance(ex({0, 0}), ex({1, 1}), Rational(1), exact));
  CHECK(matches_distance(fl({0, 0}), fl({0.6, 0.8}), Rational(1), ComparisonMode::tolerant(1e-9)));
  const DistanceSpec spec{{Rational(1)}, exact};
  CHECK_THROWS(matches_distance(ex({0, 0}), ex({1, 0}), Rational(2), spec));
}

TEST_CASE("comparison mode text and validation") {
  CHECK(ComparisonMode::parse("exact").is_exact());
  const auto tol = ComparisonMode::parse("tol:1e-6");
  CHECK_FALSE(tol.is_exact());
  CHECK(tol.eps() == 1e-6);
  CHECK_THROWS(ComparisonMode::parse("fuzzy"));
  CHECK_THROWS((DistanceSpec{{Rational(0)}, ComparisonMode::exact()}.validate()));
  CHECK_THROWS((DistanceSpec{{Rational(1, 1000)}, ComparisonMode::tolerant(1e-4)}.validate()));
  CHECK_NOTHROW((DistanceSpec{{Rational(1)}, ComparisonMode::tolerant()}.validate()));
}

TEST_CASE("point identity ignores ids") {
  CHECK(Point::exact({Rational(1), Rational(2)}, 5) == Point::exact({Rational(1), Rational(2)}, 9));
  CHECK_FALSE(fl({0.0, 0.1}) == fl({0.0, std::nextafter(0.1, 1.0)}));
  CHECK_THROWS_AS(fl({0.0}).rational_coords(), std::logic_error);
}

TEST_CASE("rational circle points") {
  const Point o = ex({0, 0});
  auto one = rational_circle_points(o, Rational(1), 1, Rational(0), Rational(0), std::array<Rational, 2>{1, 0});
  REQUIRE(one.size() == 1);
  CHECK(one[0] == ex({1, 0}));
  const Point p = rational_circle_point(o, {1, 0}, Rational(1, 2));
  CHECK(p == ex({Rational(3, 5), Rational(4, 5)}));

  auto three = rational_circle_points(o, Rational(1, 2), 3, Rational(0), Rational(1),
                                      std::array<Rational, 2>{Rational(1, 2), Rational(1, 2)});
  REQUIRE(three.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(squared_distance_exact(three[i], o) == Rational(1, 2));
    for (std::size_t j = i + 1; j < 3; ++j) CHECK_FALSE(three[i] == three[j]);
  }
  CHECK_THROWS_AS(rational_circle_points(o, Rational(3), 2, Rational(0), Rational(1)), NoRationalPoint);
  CHECK_THROWS_AS(rational_circle_points(o, Rational(1), 2, Rational(1), Rational(0)), std::invalid_argument);
}

TEST_CASE("rational points found on sums of two squares") {
  for (long r2 : {1L, 2L, 5L, 25L, 65L}) {
    auto seed = find_rational_point_on_circle(Rational(r2));
    REQUIRE(seed.has_value());
    CHECK((*seed)[0] * (*seed)[0] + (*seed)[1] * (*seed)[1] == Rational(r2));
  }
  auto half = find_rational_point_on_circle(Rational(5, 4));
  REQUIRE(half.has_value());
  CHECK((*half)[0] * (*half)[0] + (*half)[1] * (*half)[1] == Rational(5, 4));
  CHECK_FALSE(find_rational_point_on_circle(Rational(3)).has_value());
  CHECK_FALSE(find_rational_point_on_circle(Rational(7, 2)).has_value());
  // every point produced stays on the circle exactly
  const Point c = ex({Rational(1, 3), -2});
  for (const auto& q : rational_circle_points(c, Rational(13), 25, Rational(-2), Rational(3))) {
    CHECK(matches_distance(q, c, Rational(13), ComparisonMode::exact()));
  }
}

TEST_CASE("circle circle intersection") {
  auto tangent = circle_circle_intersection(fl({0, 0}), 1.0, fl({2, 0}), 1.0);
  REQUIRE(tangent.size() == 1);
  CHECK(tangent[0].float_coords()[0] == doctest::Approx(1.0));
  CHECK(std::abs(tangent[0].float_coords()[1]) < 1e-12);

  auto two = circle_circle_intersection(fl({0, 0}), 1.0, fl({1, 0}), 1.0);
  REQUIRE(two.size() == 2);
  for (const auto& p : two) {
    CHECK(p.float_coords()[0] == doctest::Approx(0.5));
    CHECK(std::abs(p.float_coords()[1]) == doctest::Approx(std::sqrt(3.0) / 2));
  }
  CHECK(circle_circle_intersection(fl({0, 0}), 1.0, fl({3, 0}), 1.0).empty());
  CHECK(circle_circle_intersection(fl({0, 0}), 9.0, fl({1, 0}), 1.0).empty());
  CHECK_THROWS(circle_circle_intersection(fl({0, 0}), 1.0, fl({0, 0}), 4.0));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5, 5), r(0.5, 4);
  for (int i = 0; i < 200; ++i) {
    const Point a = fl({u(rng), u(rng)}), b = fl({u(rng), u(rng)});
    const double ra = r(rng), rb = r(rng);
    for (const auto& p : circle_circle_intersection(a, ra, b, rb)) {
      CHECK(std::abs(squared_distance_float(p, a) - ra) <= 1e-9 * ra);
      CHECK(std::abs(squared_distance_float(p, b) - rb) <= 1e-9 * rb);
    }
  }
}

TEST_CASE("sphere sphere intersection and sampling") {
  auto s = sphere_sphere_intersection_circle(fl({0, 0, 0}), 1.0, fl({1, 0, 0}), 1.0);
  REQUIRE(s.kind == SphereIntersection::Kind::circle);
  CHECK(s.circle.center[0] == doctest::Approx(0.5));
  CHECK(std::abs(s.circle.axis[0]) == doctest::Approx(1.0));
  CHECK(s.circle.rho2 == doctest::Approx(0.75));
  auto pts = sample_circle_3d(s.circle, 4);
  REQUIRE(pts.size() == 4);
  for (const auto& p : pts) {
    CHECK(std::abs(squared_distance_float(p, fl({0, 0, 0})) - 1.0) <= 1e-9);
    CHECK(std::abs(squared_distance_float(p, fl({1, 0, 0})) - 1.0) <= 1e-9);
  }
  CHECK(sphere_sphere_intersection_circle(fl({0, 0, 0}), 1.0, fl({3, 0, 0}), 1.0).kind ==
        SphereIntersection::Kind::empty);
  CHECK(sphere_sphere_intersection_circle(fl({0, 0, 0}), 1.0, fl({2, 0, 0}), 1.0).kind ==
        SphereIntersection::Kind::tangent);
  CHECK_THROWS(sphere_sphere_intersection_circle(fl({0, 0, 0}), 1.0, fl({0, 0, 0}), 2.0));
}

TEST_CASE("separation certificate flags the guard band") {
  const double eps = 1e-9;
  const PointSet P{fl({0, 0})};
  CHECK(certify_separation(P, PointSet{fl({1.0, 0})}, Rational(1), eps).stable);
  CHECK(certify_separation(P, PointSet{fl({1.0 + 2e-10, 0})}, Rational(1), eps).stable);
  const auto bad = certify_separation(P, PointSet{fl({1.0 + 2e-8, 0}), fl({1.0 + 3e-8, 0})}, Rational(1), eps);
  CHECK_FALSE(bad.stable);
  CHECK(bad.offending_pairs == 2);
  CHECK(certify_separation(P, PointSet{fl({1.0 + 1e-6, 0})}, Rational(1), eps).stable);

  const DistanceMatcher m(Rational(1), ComparisonMode::tolerant(eps));
  CHECK(m.in_guard_band(P[0], fl({1.0 + 2e-8, 0})));
  CHECK_FALSE(m(P[0], fl({1.0 + 2e-8, 0})));
}
