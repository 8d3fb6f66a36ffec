#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "chain_census/constructions.hpp"
#include "oracles.hpp"

using namespace chain_census;

namespace {

BigInt big(std::uint64_t v) { return BigInt(static_cast<unsigned long>(v)); }

bool certified(const LayeredConfig& config) {
  if (config.mode().is_exact()) return true;
  for (std::size_t i = 0; i + 1 < config.layer_count(); ++i) {
    if (!certify_separation(config.layer(i), config.layer(i + 1), config.spec().delta2[i], config.mode().eps())
             .stable)
      return false;
  }
  return true;
}

std::size_t brute_min_degree(const PointSet& pts, const Rational& d2) {
  std::size_t best = pts.size();
  for (const auto& p : pts) {
    std::size_t d = 0;
    for (const auto& q : pts) d += squared_distance_exact(p, q) == d2;
    best = std::min(best, d);
  }
  return best;
}

}  // namespace

TEST_CASE("planar chain examples") {
  const auto k2 = gen_planar_chain(2, {Rational(1), Rational(2)}, 5, 0.1);
  CHECK(k2.mode().is_exact());
  CHECK(count_chains(k2) == 25);

  const auto k5 = gen_planar_chain(5, {1, 2, 1, 3, 1}, 8, 0.1);
  CHECK(count_chains(k5) >= 512);
  CHECK(certified(k5));

  const auto k0 = gen_planar_chain(0, {}, 1, 0.1);
  CHECK(count_chains(k0) == 1);

  // last layer within eps
  const auto k3 = gen_planar_chain(3, {1, 1, 1}, 10, 0.05);
  const auto& last = k3.layer(3);
  for (const auto& p : last)
    for (const auto& q : last) CHECK(squared_distance_float(p, q) <= 0.05 * 0.05 + 1e-12);
}

TEST_CASE("planar chain meets its floor for every k") {
  for (std::size_t k = 0; k <= 7; ++k) {
    const std::size_t n = 6;
    const auto config = gen_planar_chain(k, std::vector<Rational>(k, Rational(1)), n, 0.1);
    CHECK(count_chains(config) >= planar_chain_floor(k, n));
    CHECK(planar_chain_floor(k, n) == big_pow(BigInt(6), (k + 1) / 3 + 1));
    CHECK(certified(config));
  }
  CHECK_THROWS(gen_planar_chain(2, {Rational(1), Rational(-1)}, 5, 0.1));
  CHECK_THROWS_AS(gen_planar_chain(1, {Rational(3)}, 5, 0.1, ComparisonMode::exact()), NoRationalPoint);
}

TEST_CASE("unit rich grid") {
  const auto g4 = gen_unit_rich_grid(4);
  CHECK(g4.popular_d2 == Rational(1));
  CHECK(g4.pair_count == 4);

  for (std::size_t m : {9u, 10u, 25u, 37u}) {
    const auto g = gen_unit_rich_grid(m);
    std::map<Rational, std::uint64_t> hist;
    for (std::size_t i = 0; i < g.points.size(); ++i)
      for (std::size_t j = i + 1; j < g.points.size(); ++j) ++hist[squared_distance_exact(g.points[i], g.points[j])];
    auto best = hist.begin();
    for (auto it = hist.begin(); it != hist.end(); ++it)
      if (it->second > best->second) best = it;
    CHECK(g.points.size() == m);
    CHECK(g.popular_d2 == best->first);
    CHECK(g.pair_count == best->second);
    CHECK(g.pair_count >= m - 1);
  }
}

TEST_CASE("split and translate") {
  const PointSet a{Point::exact({0, 0})}, b{Point::exact({1, 0})};
  const auto s = split_and_translate(a, b, Rational(1), 0.5, 3);
  CHECK(s.original_incidences == 1);
  CHECK(s.preserved_incidences == 1);
  CHECK(s.x1.size() == 1);
  CHECK(s.x2.size() == 1);
  CHECK(s.diameter2.is_zero());
  CHECK(s.offsets_tried >= 64);

  const auto grid = gen_unit_rich_grid(100);
  const auto g = split_and_translate(grid.points, grid.points, grid.popular_d2, 1.0, 7);
  CHECK(g.meets_floor());
  CHECK(big(g.preserved_incidences) * 968 >= big(g.original_incidences));
  CHECK(g.uncut_incidences * 2 >= g.original_incidences);
  CHECK(g.x1.size() == grid.points.size());  // nothing dropped for lying on a grid line
  CHECK(g.normalized_diameter <= 1.0);
  CHECK(g.preserved_incidences == count_incidences(g.x1, g.x2, grid.popular_d2, ComparisonMode::exact()));

  // same seed, same output
  const auto again = split_and_translate(grid.points, grid.points, grid.popular_d2, 1.0, 7);
  CHECK(again.preserved_incidences == g.preserved_incidences);
  CHECK(again.x2 == g.x2);

  const PointSet far{Point::exact({5, 5})};
  CHECK_THROWS(split_and_translate(a, far, Rational(1), 0.5, 1));
}

TEST_CASE("k = 1 mod 3") {
  const auto k1 = gen_planar_k1mod3(1, 16, 1.0, 2);
  CHECK(count_chains(k1.config) == big(k1.split.preserved_incidences));

  const auto k4 = gen_planar_k1mod3(4, 16, 1.0, 2);
  CHECK(count_chains(k4.config) >= 16 * big(k4.split.preserved_incidences));
  CHECK(k4.floor == 16 * big(k4.split.preserved_incidences));
  CHECK(certified(k4.config));
  CHECK_THROWS(gen_planar_k1mod3(3, 16, 1.0, 2));
}

TEST_CASE("3d even") {
  CHECK(count_chains(gen_3d_even(2, {1, 1}, 7)) == 49);
  CHECK(count_chains(gen_3d_even(4, {1, 1, 1, 1}, 5)) == 125);
  CHECK(count_chains(gen_3d_even(2, {1, 1}, 1)) == 1);
  const auto mixed = gen_3d_even(4, {1, 2, Rational(1, 2), 3}, 6);
  CHECK(count_chains(mixed) == 216);
  CHECK(certified(mixed));
  CHECK_THROWS(gen_3d_even(3, {1, 1, 1}, 4));
}

TEST_CASE("peeling") {
  const auto exact = ComparisonMode::exact();
  // equilateral triangle with squared side 2
  const PointSet eq{Point::exact({1, 0, 0}), Point::exact({0, 1, 0}), Point::exact({0, 0, 1})};
  const auto t = peel_min_degree(eq, Rational(2), exact);
  CHECK(t.core.size() == 3);
  CHECK(t.min_degree == 2);

  PointSet star{Point::exact({0, 0})};
  star.push_back(Point::exact({5, 0}));
  star.push_back(Point::exact({-5, 0}));
  star.push_back(Point::exact({0, 5}));
  star.push_back(Point::exact({3, 4}));
  star.push_back(Point::exact({-4, 3}));
  const auto s = peel_min_degree(star, Rational(25), exact);
  CHECK(s.initial_edges == 5);
  CHECK(s.core.size() == 6);
  CHECK(s.min_degree == 1);
  CHECK(s.meets_threshold());

  const auto grid = gen_unit_rich_grid(400);
  const auto g = peel_min_degree(grid.points, grid.popular_d2, exact);
  CHECK_FALSE(g.core.empty());
  CHECK(g.meets_threshold());
  CHECK(g.min_degree == brute_min_degree(g.core, grid.popular_d2));

  CHECK_THROWS(peel_min_degree({Point::exact({0, 0}), Point::exact({7, 7})}, Rational(1), exact));
}

TEST_CASE("3d odd regular") {
  const auto r = gen_3d_odd_regular(3, 125);
  REQUIRE(r.floor.has_value());
  const BigInt chains = count_chains(r.config);
  CHECK(chains >= *r.floor);
  CHECK(*r.floor == big(r.peel.core.size()) * big_pow(BigInt(static_cast<unsigned long>(r.peel.min_degree - 3)), 3));
  for (std::size_t i = 1; i < r.config.layer_count(); ++i) CHECK(r.config.layer(i) == r.config.layer(0));

  const auto small = gen_3d_odd_regular(3, 8);
  CHECK(small.popular_d2 == Rational(1));
  CHECK(small.peel.min_degree == 3);
  CHECK_FALSE(small.floor.has_value());
  CHECK(count_chains(small.config) == big(oracle::count(small.config).chains));
}

TEST_CASE("3d odd sphere") {
  const auto r = gen_3d_odd_sphere(3, 16);
  CHECK(r.incidences >= 16);
  CHECK(count_chains(r.config) >= r.floor);
  CHECK(r.floor == 16 * big(r.incidences));
  CHECK(certified(r.config));
  // every sphere point sits at unit distance from the previous singleton
  const auto& centre = r.config.layer(r.config.k() - 2);
  REQUIRE(centre.size() == 1);
  for (const auto& p : r.config.layer(r.config.k() - 1))
    CHECK(std::abs(squared_distance_float(p, centre[0]) - 1.0) <= 1e-9);

  const auto none = gen_3d_odd_sphere(3, 16, [](std::size_t) {
    return SpherePair{{Point::floating({0.0, 0.0, 1.0})}, {Point::floating({50.0, 50.0, 50.0})}};
  });
  CHECK(none.incidences == 0);
  CHECK(none.floor == 0);
  CHECK(count_chains(none.config) == 0);

  CHECK_THROWS(gen_3d_odd_sphere(3, 16, [](std::size_t) {
    return SpherePair{{Point::floating({0.0, 0.0, 1.5})}, {Point::floating({0.0, 0.0, 2.5})}};
  }));
}

TEST_CASE("orthogonal circles") {
  CHECK(count_chains(gen_orthogonal_circles(4, 1, 20)) == 200);
  const auto c = gen_orthogonal_circles(5, 3, 20);
  CHECK(c.dim() == 5);
  CHECK(count_chains(c) == 16200);
  const auto& pts = c.layer(0);
  for (const auto& p : pts) {
    for (const auto& q : pts) {
      const bool first_p = !(p.rational_coords()[0].is_zero() && p.rational_coords()[1].is_zero());
      const bool first_q = !(q.rational_coords()[0].is_zero() && q.rational_coords()[1].is_zero());
      if (first_p != first_q) CHECK(squared_distance_exact(p, q) == Rational(1));
    }
  }
  for (std::size_t k = 1; k <= 4; ++k) {
    const auto small = gen_orthogonal_circles(4, k, 6);
    CHECK(count_chains(small) == big(oracle::count(small).chains));
    CHECK(count_chains(small) == orthogonal_circles_count(k, 6));
  }
  CHECK_THROWS(gen_orthogonal_circles(3, 1, 20));
  CHECK_THROWS(gen_orthogonal_circles(4, 1, 7));
}

TEST_CASE("star trees") {
  const auto one = gen_star(1, 10);
  CHECK(count_tree_embeddings(one.layers, one.tree, one.mode) == 10);
  const auto three = gen_star(3, 30);
  const BigInt c = count_tree_embeddings(three.layers, three.tree, three.mode);
  CHECK(c == 1000);
  CHECK(c == big(oracle::tree_embeddings(three.layers, three.tree, three.mode)));
  CHECK(three.exact_count);
  CHECK(three.floor == 1000);
  CHECK_THROWS(gen_star(2, 10, std::vector<Rational>{Rational(1), Rational(1)}));
  CHECK_THROWS(gen_star(3, 10));
}

TEST_CASE("spider trees") {
  const auto t = spider_tree(3, {Rational(1), Rational(2), Rational(1)});
  CHECK(t.vertex_count == 10);
  CHECK(t.edges.size() == 9);
  std::size_t centre_degree = 0;
  for (const auto& e : t.edges) centre_degree += (e.a == 0 || e.b == 0);
  CHECK(centre_degree == 3);
  CHECK_NOTHROW(t.validate());

  const auto joints = gen_T_l3(3, 8, TreeVariant::joints_fixed);
  CHECK(joints.tree.vertex_count == 10);
  CHECK(count_tree_embeddings(joints.layers, joints.tree, joints.mode) >= big_pow(BigInt(8), 4));
  CHECK(joints.floor == big_pow(BigInt(8), 4));

  const auto path = gen_T_l3(1, 5, TreeVariant::joints_fixed);
  CHECK(path.tree.vertex_count == 4);
  CHECK(count_tree_embeddings(path.layers, path.tree, path.mode) >= 25);

  const auto centre = gen_T_l3(2, 16, TreeVariant::center_fixed);
  CHECK(count_tree_embeddings(centre.layers, centre.tree, centre.mode) >= centre.floor);
  CHECK(centre.floor > 0);
}

TEST_CASE("stereographic projection") {
  const auto south = stereographic({Point::floating({0.0, 0.0})});
  CHECK(south[0].float_coords()[2] == doctest::Approx(-1.0));
  CHECK(std::abs(south[0].float_coords()[0]) < 1e-15);

  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> u(-3, 3);
  PointSet planar;
  for (int i = 0; i < 50; ++i) planar.push_back(Point::floating({u(rng), u(rng)}));
  const auto sphere = stereographic(planar);
  for (const auto& q : sphere) {
    double n2 = 0;
    for (double x : q.float_coords()) n2 += x * x;
    CHECK(std::abs(n2 - 1.0) <= 1e-12);
  }
  const auto back = inverse_stereographic(sphere);
  double worst = 0;
  for (std::size_t i = 0; i < planar.size(); ++i)
    for (std::size_t j = 0; j < 2; ++j)
      worst = std::max(worst, std::abs(back[i].float_coords()[j] - planar[i].float_coords()[j]));
  CHECK(worst <= 1e-12);
}

TEST_CASE("generators are deterministic") {
  const auto a = gen_planar_chain(5, {1, 1, 1, 1, 1}, 10, 0.1);
  const auto b = gen_planar_chain(5, {1, 1, 1, 1, 1}, 10, 0.1);
  for (std::size_t i = 0; i < a.layer_count(); ++i) CHECK(a.layer(i) == b.layer(i));
  const auto x = gen_planar_k1mod3(4, 16, 1.0, 99);
  const auto y = gen_planar_k1mod3(4, 16, 1.0, 99);
  for (std::size_t i = 0; i < x.config.layer_count(); ++i) CHECK(x.config.layer(i) == y.config.layer(i));
}
