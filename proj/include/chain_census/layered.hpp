#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "chain_census/geometry.hpp"
#include "chain_census/rational.hpp"

namespace chain_census {

struct Layer {
  PointSet points;
  int label = 1;  // 1-based layer index
};

class InvalidConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Layers P_1..P_{k+1} with squared distances delta_1^2..delta_k^2. Chains
// pick one point per layer with consecutive distances matching.
class LayeredConfig {
 public:
  // Validates layer count, dimensions, scalar kinds against the mode, unique
  // ids and coordinates within each layer. dim is needed only when every
  // layer is empty; otherwise it is checked against the points.
  LayeredConfig(std::vector<PointSet> layers, DistanceSpec spec, std::size_t dim = 0);

  std::size_t k() const { return spec_.delta2.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t layer_count() const { return layers_.size(); }
  // 0-based.
  const PointSet& layer(std::size_t i) const { return layers_.at(i).points; }
  const std::vector<Layer>& layers() const { return layers_; }
  const DistanceSpec& spec() const { return spec_; }
  const ComparisonMode& mode() const { return spec_.mode; }
  std::size_t max_layer_size() const;
  // Product of layer sizes.
  BigInt product_size() const;

  // Layers and delta2 in reverse order.
  LayeredConfig reversed() const;
  // Same spec, new layers (e.g. filtered sub-layers).
  LayeredConfig with_layers(std::vector<PointSet> layers) const;

 private:
  std::vector<Layer> layers_;
  DistanceSpec spec_;
  std::size_t dim_ = 0;
};

enum class AdjacencyStrategy { brute, grid, automatic };

class SeparationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// neighbors[p] lists, in increasing order, the indices q of Q with
// matches(P[p], Q[q]). In tolerant mode a pair inside the guard band throws
// SeparationFailure unless certify is false.
using NeighborLists = std::vector<std::vector<std::uint32_t>>;
NeighborLists neighbor_lists(std::span<const Point> P, std::span<const Point> Q,
                             const DistanceMatcher& matcher,
                             AdjacencyStrategy strategy = AdjacencyStrategy::automatic,
                             bool certify = true);

// Per consecutive layer pair i: lists[i][p] = indices in layer i+1 at
// distance delta_i from point p of layer i.
struct BipartiteAdjacency {
  std::vector<NeighborLists> lists;

  std::size_t layer_pairs() const { return lists.size(); }
  std::uint64_t edge_count(std::size_t i) const;
  std::uint64_t total_edges() const;
  friend bool operator==(const BipartiteAdjacency&, const BipartiteAdjacency&) = default;
};

BipartiteAdjacency build_adjacency(const LayeredConfig& config,
                                   AdjacencyStrategy strategy = AdjacencyStrategy::automatic);

// Global identity classes: ids[i][p] is shared by coordinate-equal points
// across layers. count is the number of distinct points.
struct IdentityIndex {
  std::vector<std::vector<std::uint32_t>> ids;
  std::size_t count = 0;
};
IdentityIndex identity_index(std::span<const PointSet> layers);

struct CountOptions {
  AdjacencyStrategy strategy = AdjacencyStrategy::automatic;
  // Workers split the first-layer points; totals are identical for any value.
  unsigned threads = 1;
};

// Tuples with consecutive distances matching; repeated points allowed.
BigInt count_walks(const LayeredConfig& config, const CountOptions& options = {});
BigInt count_walks(const LayeredConfig& config, const BipartiteAdjacency& adjacency, unsigned threads = 1);

// Walks whose points are pairwise distinct (coordinate identity).
BigInt count_chains(const LayeredConfig& config, const CountOptions& options = {});
BigInt count_chains(const LayeredConfig& config, const BipartiteAdjacency& adjacency, unsigned threads = 1);

// Ordered pairs (p, q) in P x Q at squared distance d2.
std::uint64_t count_incidences(std::span<const Point> P, std::span<const Point> Q, const Rational& d2,
                               const ComparisonMode& mode,
                               AdjacencyStrategy strategy = AdjacencyStrategy::automatic);

struct TreeEdge {
  std::size_t a = 0;  // 0-based vertex
  std::size_t b = 0;
  Rational d2;
  friend bool operator==(const TreeEdge&, const TreeEdge&) = default;
};

// A tree on vertex_count vertices with squared-distance labels.
struct LabeledTree {
  std::size_t vertex_count = 1;
  std::vector<TreeEdge> edges;

  // Throws InvalidConfig for wrong edge count, out-of-range vertices,
  // self loops, cycles, disconnection or nonpositive labels.
  void validate() const;
  static LabeledTree path(std::span<const Rational> delta2);
  friend bool operator==(const LabeledTree&, const LabeledTree&) = default;
};

// Tuples of distinct points, one from layers[v] for every vertex v, with
// every tree edge realizing its squared distance.
BigInt count_tree_embeddings(std::span<const PointSet> layers, const LabeledTree& tree,
                             const ComparisonMode& mode, const CountOptions& options = {});
// Every vertex draws from the same set.
BigInt count_tree_embeddings(const PointSet& points, const LabeledTree& tree, const ComparisonMode& mode,
                             const CountOptions& options = {});

}  // namespace chain_census
