#include <doctest.h>

#include <random>

#include "chain_census/constructions.hpp"
#include "chain_census/layered.hpp"
#include "oracles.hpp"

using namespace chain_census;

namespace {

Point ex(long x, long y) { return Point::exact({Rational(x), Rational(y)}); }

PointSet numbered(PointSet s) {
  renumber(s);
  return s;
}

PointSet unit_square() { return numbered({ex(0, 0), ex(1, 0), ex(0, 1), ex(1, 1)}); }

BigInt big(std::uint64_t v) { return BigInt(static_cast<unsigned long>(v)); }

}  // namespace

TEST_CASE("config validation") {
  const auto exact = ComparisonMode::exact();
  CHECK_THROWS_AS(LayeredConfig({{ex(0, 0)}}, DistanceSpec{{Rational(1)}, exact}), InvalidConfig);
  CHECK_THROWS_AS(LayeredConfig({numbered({ex(0, 0), ex(0, 0)}), {ex(1, 0)}}, DistanceSpec{{Rational(1)}, exact}),
                  InvalidConfig);
  CHECK_THROWS_AS(LayeredConfig({{ex(0, 0), ex(2, 0)}, {ex(1, 0)}}, DistanceSpec{{Rational(1)}, exact}),
                  InvalidConfig);
  CHECK_THROWS_AS(LayeredConfig({{ex(0, 0)}, {Point::exact({Rational(1)})}}, DistanceSpec{{Rational(1)}, exact}),
                  InvalidConfig);
  CHECK_THROWS(LayeredConfig({{ex(0, 0)}, {Point::floating({1.0, 0.0})}}, DistanceSpec{{Rational(1)}, exact}));
  CHECK_NOTHROW(LayeredConfig({{}, {}}, DistanceSpec{{Rational(1)}, exact}, 2));
}

TEST_CASE("small counting examples") {
  const auto exact = ComparisonMode::exact();
  const LayeredConfig single({{ex(0, 0)}, {ex(1, 0)}}, DistanceSpec{{Rational(1)}, exact});
  CHECK(build_adjacency(single).total_edges() == 1);
  CHECK(count_walks(single) == 1);

  PointSet line;
  for (long i = 0; i < 7; ++i) line.push_back(ex(i, 0));
  const LayeredConfig k0({numbered(line)}, DistanceSpec{{}, exact});
  CHECK(count_walks(k0) == 7);
  CHECK(count_chains(k0) == 7);

  CHECK(count_incidences(unit_square(), unit_square(), Rational(1), exact) == 8);
  CHECK(count_incidences(unit_square(), unit_square(), Rational(2), exact) == 4);
}

TEST_CASE("orthogonal circles: complete bipartite adjacency") {
  const auto config = gen_orthogonal_circles(4, 3, 20);
  PointSet a, b;
  for (const auto& p : config.layer(0)) (p.rational_coords()[0].is_zero() && p.rational_coords()[1].is_zero() ? b : a).push_back(p);
  CHECK(a.size() == 10);
  CHECK(b.size() == 10);
  CHECK(count_incidences(a, b, Rational(1), ComparisonMode::exact()) == 100);
  CHECK(count_incidences(a, a, Rational(1), ComparisonMode::exact()) == 0);
  // alternating layers give 10^4 walks
  const LayeredConfig alt({a, b, a, b}, DistanceSpec{std::vector<Rational>(3, Rational(1)), ComparisonMode::exact()});
  CHECK(count_walks(alt) == 10000);
  CHECK(count_chains(alt) == 8100);
  CHECK(count_chains(config) == 16200);
  CHECK(count_chains(config) == orthogonal_circles_count(3, 20));
}

TEST_CASE("grid and brute adjacency agree") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const PointSet P = oracle::random_int_points(rng, 100, 12);
    const PointSet Q = oracle::random_int_points(rng, 100, 12);
    for (long d2 : {1L, 5L, 25L}) {
      const DistanceMatcher m(Rational(d2), ComparisonMode::exact());
      CHECK(neighbor_lists(P, Q, m, AdjacencyStrategy::grid) == neighbor_lists(P, Q, m, AdjacencyStrategy::brute));
    }
  }
  // tolerant mode on float copies
  const PointSet P = oracle::random_int_points(rng, 80, 10);
  PointSet F;
  for (const auto& p : P) F.push_back(p.to_floating());
  const DistanceMatcher m(Rational(13), ComparisonMode::tolerant());
  CHECK(neighbor_lists(F, F, m, AdjacencyStrategy::grid) == neighbor_lists(F, F, m, AdjacencyStrategy::brute));
}

TEST_CASE("grid incidences on a 30x30 grid match pair counting") {
  const auto grid = gen_unit_rich_grid(900);
  std::uint64_t brute = 0;
  for (const auto& p : grid.points) {
    for (const auto& q : grid.points) brute += squared_distance_exact(p, q) == grid.popular_d2;
  }
  CHECK(count_incidences(grid.points, grid.points, grid.popular_d2, ComparisonMode::exact()) == brute);
  CHECK(brute == 2 * grid.pair_count);
}

TEST_CASE("walks and chains vs exhaustive enumeration") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 200; ++trial) {
    const auto config = oracle::random_config(rng, 4, 6, 2);
    const auto brute = oracle::count(config);
    const BigInt w = count_walks(config), c = count_chains(config);
    CHECK(w == big(brute.walks));
    CHECK(c == big(brute.chains));
    CHECK(c <= w);
    // direction independence
    CHECK(count_chains(config.reversed()) == c);
  }
}

TEST_CASE("disjoint layers: chains equal walks") {
  const auto exact = ComparisonMode::exact();
  PointSet a, b, c;
  for (long i = 0; i < 5; ++i) {
    a.push_back(ex(i, 0));
    b.push_back(ex(i, 1));
    c.push_back(ex(i, 2));
  }
  const LayeredConfig config({numbered(a), numbered(b), numbered(c)}, DistanceSpec{{Rational(1), Rational(2)}, exact});
  CHECK(count_chains(config) == count_walks(config));
  CHECK(count_walks(config) == big(oracle::count(config).walks));
}

TEST_CASE("thread count never changes results") {
  const auto config = gen_planar_chain(5, std::vector<Rational>(5, Rational(1)), 12, 0.1);
  const BigInt c1 = count_chains(config, {AdjacencyStrategy::automatic, 1});
  const BigInt w1 = count_walks(config, {AdjacencyStrategy::automatic, 1});
  for (unsigned t : {2u, 3u, 8u}) {
    CHECK(count_chains(config, {AdjacencyStrategy::automatic, t}) == c1);
    CHECK(count_walks(config, {AdjacencyStrategy::automatic, t}) == w1);
  }
}

TEST_CASE("identity index shares coordinate-equal points") {
  const std::vector<PointSet> layers{{ex(0, 0), ex(1, 0)}, {ex(1, 0), ex(2, 0)}, {ex(0, 0)}};
  const auto idx = identity_index(layers);
  CHECK(idx.count == 3);
  CHECK(idx.ids[0][1] == idx.ids[1][0]);
  CHECK(idx.ids[0][0] == idx.ids[2][0]);
  CHECK(idx.ids[0][0] != idx.ids[1][1]);
}

TEST_CASE("labeled tree validation") {
  LabeledTree t{3, {{0, 1, Rational(1)}, {1, 2, Rational(1)}}};
  CHECK_NOTHROW(t.validate());
  CHECK_THROWS_AS((LabeledTree{3, {{0, 1, Rational(1)}}}.validate()), InvalidConfig);
  CHECK_THROWS_AS((LabeledTree{3, {{0, 1, Rational(1)}, {0, 1, Rational(1)}}}.validate()), InvalidConfig);
  CHECK_THROWS_AS((LabeledTree{3, {{0, 0, Rational(1)}, {1, 2, Rational(1)}}}.validate()), InvalidConfig);
  CHECK_THROWS_AS((LabeledTree{2, {{0, 5, Rational(1)}}}.validate()), InvalidConfig);
  CHECK_THROWS_AS((LabeledTree{2, {{0, 1, Rational(0)}}}.validate()), InvalidConfig);
}

TEST_CASE("tree embeddings match chains, incidences and brute force") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const auto config = oracle::random_config(rng, 3, 6, 2);
    std::vector<PointSet> layers;
    for (std::size_t i = 0; i < config.layer_count(); ++i) layers.push_back(config.layer(i));
    const auto path = LabeledTree::path(config.spec().delta2);
    CHECK(count_tree_embeddings(layers, path, config.mode()) == count_chains(config));
  }
  const PointSet sq = unit_square();
  const LabeledTree edge{2, {{0, 1, Rational(1)}}};
  CHECK(count_tree_embeddings(sq, edge, ComparisonMode::exact()) ==
        big(count_incidences(sq, sq, Rational(1), ComparisonMode::exact())));

  // a non-path tree: a centre with three leaves
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<PointSet> layers;
    for (int v = 0; v < 4; ++v) layers.push_back(oracle::random_int_points(rng, 5, 2));
    const LabeledTree star{4, {{0, 1, Rational(1)}, {0, 2, Rational(2)}, {0, 3, Rational(1)}}};
    CHECK(count_tree_embeddings(layers, star, ComparisonMode::exact()) ==
          big(oracle::tree_embeddings(layers, star, ComparisonMode::exact())));
    CHECK(count_tree_embeddings(layers, star, ComparisonMode::exact(), {AdjacencyStrategy::automatic, 3}) ==
          big(oracle::tree_embeddings(layers, star, ComparisonMode::exact())));
  }
}
