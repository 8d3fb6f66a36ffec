#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "chain_census/geometry.hpp"
#include "chain_census/layered.hpp"
#include "chain_census/rational.hpp"

namespace chain_census {

class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inductive planar construction for a fixed distance vector. k = 0, 1, 2
// are built directly (exact when every circle has rational points); each
// further block of three layers appends a matched layer, a singleton and a
// fresh arc of n points, switching to tolerant mode. The last layer has
// diameter <= eps. k = 1 uses a singleton and a concentric arc, so
// count_chains >= n^(floor((k+1)/3)+1) for every k. Passing an exact mode
// makes a missing rational circle point (or k >= 3) an error.
LayeredConfig gen_planar_chain(std::size_t k, const std::vector<Rational>& delta2, std::size_t n, double eps,
                               std::optional<ComparisonMode> mode = std::nullopt);

// Lower bound certified by gen_planar_chain.
BigInt planar_chain_floor(std::size_t k, std::size_t n);

struct UnitRichGrid {
  PointSet points;
  Rational popular_d2;
  // Unordered pairs at popular_d2.
  std::uint64_t pair_count = 0;
};

// Row-major ceil(sqrt(m)) x ceil(sqrt(m)) integer grid truncated to m
// points, with its most frequent squared distance (ties toward the
// smallest).
UnitRichGrid gen_unit_rich_grid(std::size_t m);

struct SplitResult {
  PointSet x1;  // every translated point of the first set
  PointSet x2;  // translated points of the second set inside the chosen cell
  std::uint64_t original_incidences = 0;  // E
  std::uint64_t uncut_incidences = 0;     // edges kept by the chosen grid offset
  std::uint64_t preserved_incidences = 0; // incidences(x1, x2) after translation
  std::size_t cells_per_side = 0;         // ceil(22 / eps)
  std::size_t offsets_tried = 0;
  Rational diameter2;                     // squared diameter of x2
  double normalized_diameter = 0.0;       // diameter / delta

  // preserved >= E / (2 ceil(22/eps)^2), exactly.
  bool meets_floor() const;
  Rational floor() const;
};

// Cut-and-translate: keeps at least half of the delta-edges between x1 and
// x2 under a spacing-10-delta grid, stacks every grid square into
// [0, 11 delta]^2, and returns the second set's points in the cell of side
// <= eps*delta/2 with the most incident edges. Lengths scale with
// delta = sqrt(d2), so eps is relative to delta. Exact; deterministic per
// seed.
SplitResult split_and_translate(const PointSet& x1, const PointSet& x2, const Rational& d2, double eps,
                                std::uint64_t seed);

struct K1Mod3Result {
  LayeredConfig config;
  SplitResult split;
  Rational popular_d2;
  BigInt floor;  // n^((k-1)/3) * preserved incidences
};

// k = 1 (mod 3): the split grid pair as (P_1, P_2), then (k-1)/3 inductive
// blocks. Without tail_delta2 the later squared distances are D^2 with D
// the smallest integer >= 3 diam(P_2) (at least 1).
K1Mod3Result gen_planar_k1mod3(std::size_t k, std::size_t n, double eps, std::uint64_t seed,
                               std::optional<std::vector<Rational>> tail_delta2 = std::nullopt);

// Even k in R^3: singletons at even layers on the x axis, spheres and
// sphere-sphere circles elsewhere. count_chains = n^(k/2+1) exactly.
LayeredConfig gen_3d_even(std::size_t k, const std::vector<Rational>& delta2, std::size_t n);

struct PeelResult {
  PointSet core;
  std::uint64_t initial_edges = 0;  // E_0, unordered
  std::size_t original_size = 0;    // N
  std::size_t min_degree = 0;
  std::uint64_t core_edges = 0;

  // min_degree >= E_0 / (2N).
  bool meets_threshold() const;
};

// Repeatedly drops vertices of degree < E_0/(2N) in the d2-distance graph.
PeelResult peel_min_degree(const PointSet& points, const Rational& d2, const ComparisonMode& mode);

struct OddRegularResult {
  LayeredConfig config;
  PeelResult peel;
  Rational popular_d2;
  // |P| (minDeg - k)^k, or nothing when minDeg <= k.
  std::optional<BigInt> floor;
};

// 3D integer grid of n points, peeled at its popular distance, repeated as
// all k+1 layers.
OddRegularResult gen_3d_odd_regular(std::size_t k, std::size_t n);

struct SpherePair {
  PointSet sphere_points;  // on the unit sphere about the origin
  PointSet free_points;
};

using SphereSupplier = std::function<SpherePair(std::size_t n)>;

// sqrt(n) unit spheres whose intersection circles with the unit sphere each
// carry sqrt(n) points: at least floor(sqrt(n))^2 unit incidences.
SpherePair circle_bouquet_supplier(std::size_t n);

struct OddSphereResult {
  LayeredConfig config;
  std::uint64_t incidences = 0;
  BigInt floor;  // n^((k-1)/2) * incidences
};

OddSphereResult gen_3d_odd_sphere(std::size_t k, std::size_t n,
                                  const SphereSupplier& supplier = circle_bouquet_supplier);

// n/2 exact points on each of two orthogonal circles of radius 1/sqrt(2) in
// R^d, repeated as all k+1 layers with unit distances.
LayeredConfig gen_orthogonal_circles(std::size_t d, std::size_t k, std::size_t n);

// 2 * prod of alternating falling factorials: chains alternating between
// two circles of h points each.
BigInt orthogonal_circles_count(std::size_t k, std::size_t n);

struct TreeConstruction {
  std::vector<PointSet> layers;  // one per tree vertex
  LabeledTree tree;
  ComparisonMode mode = ComparisonMode::exact();
  BigInt floor;        // certified lower bound (equals the count when exact_count)
  bool exact_count = false;
};

// Star with l leaves: a singleton center and l concentric circles of n/l
// exact points. Embeddings = (n/l)^l. radii2 defaults to 1, 4, 9, ...
TreeConstruction gen_star(std::size_t l, std::size_t n,
                          std::optional<std::vector<Rational>> radii2 = std::nullopt);

enum class TreeVariant { center_fixed, joints_fixed };

// T_{l,3}: a center joined to l paths of three vertices. Vertex 0 is the
// center, arm j uses vertices 3j+1, 3j+2, 3j+3 outward.
// arm_d2 labels an arm's edges from the center outward.
LabeledTree spider_tree(std::size_t l, const std::array<Rational, 3>& arm_d2);

// joints_fixed: n center points, leaf neighbours fixed, n leaves per arm;
// floor n^(l+1). center_fixed: singleton center, each arm a split grid pair
// of n points; floor (preserved incidences)^l.
TreeConstruction gen_T_l3(std::size_t l, std::size_t n, TreeVariant variant, double eps = 1.0,
                          std::uint64_t seed = 1);

// Projection from the north pole onto the unit sphere and back.
PointSet stereographic(const PointSet& planar);
PointSet inverse_stereographic(const PointSet& sphere);

}  // namespace chain_census
