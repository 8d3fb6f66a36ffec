#include "chain_census/layered.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <thread>
#include <unordered_map>

namespace chain_census {

LayeredConfig::LayeredConfig(std::vector<PointSet> layers, DistanceSpec spec, std::size_t dim)
    : spec_(std::move(spec)), dim_(dim) {
  spec_.validate();
  if (layers.size() != spec_.delta2.size() + 1) {
    throw InvalidConfig("expected " + std::to_string(spec_.delta2.size() + 1) + " layers, got " +
                        std::to_string(layers.size()));
  }
  const ScalarKind kind = spec_.mode.scalar_kind();
  for (const auto& layer : layers) {
    for (const auto& p : layer) {
      if (dim_ == 0) dim_ = p.dim();
      if (p.dim() != dim_) throw InvalidConfig("layers disagree on dimension");
      if (p.kind() != kind) {
        throw InvalidConfig(kind == ScalarKind::exact ? "exact mode needs rational coordinates"
                                                      : "tolerant mode needs floating coordinates");
      }
    }
  }
  if (dim_ == 0) throw InvalidConfig("dimension unknown for an all-empty configuration");
  layers_.reserve(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    std::set<std::int64_t> ids;
    std::set<Point, PointIdentityLess> coords;
    for (const auto& p : layers[i]) {
      if (!ids.insert(p.id()).second) {
        throw InvalidConfig("duplicate point id " + std::to_string(p.id()) + " in layer " +
                            std::to_string(i + 1));
      }
      if (!coords.insert(p).second) {
        throw InvalidConfig("repeated point in layer " + std::to_string(i + 1));
      }
    }
    layers_.push_back(Layer{std::move(layers[i]), static_cast<int>(i + 1)});
  }
}

std::size_t LayeredConfig::max_layer_size() const {
  std::size_t out = 0;
  for (const auto& l : layers_) out = std::max(out, l.points.size());
  return out;
}

BigInt LayeredConfig::product_size() const {
  BigInt out = 1;
  for (const auto& l : layers_) out *= static_cast<unsigned long>(l.points.size());
  return out;
}

LayeredConfig LayeredConfig::reversed() const {
  std::vector<PointSet> layers;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) layers.push_back(it->points);
  DistanceSpec spec = spec_;
  std::reverse(spec.delta2.begin(), spec.delta2.end());
  return LayeredConfig(std::move(layers), std::move(spec), dim_);
}

LayeredConfig LayeredConfig::with_layers(std::vector<PointSet> layers) const {
  return LayeredConfig(std::move(layers), spec_, dim_);
}

namespace {

constexpr std::size_t kBruteForceLimit = 4096;

NeighborLists brute_neighbors(std::span<const Point> P, std::span<const Point> Q,
                              const DistanceMatcher& matcher, bool certify) {
  NeighborLists out(P.size());
  for (std::size_t i = 0; i < P.size(); ++i) {
    for (std::size_t j = 0; j < Q.size(); ++j) {
      if (matcher(P[i], Q[j])) {
        out[i].push_back(static_cast<std::uint32_t>(j));
      } else if (certify && matcher.in_guard_band(P[i], Q[j])) {
        throw SeparationFailure("pair within the tolerance guard band of " + matcher.d2().str());
      }
    }
  }
  return out;
}

struct CellHash {
  std::size_t operator()(const std::vector<std::int64_t>& key) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (auto v : key) h = (h ^ static_cast<std::size_t>(v)) * 0x100000001b3ULL;
    return h;
  }
};

using CellMap = std::unordered_map<std::vector<std::int64_t>, std::vector<std::uint32_t>, CellHash>;

bool cell_of(const Point& p, double side, std::vector<std::int64_t>& cell) {
  const auto& c = p.float_coords();
  cell.resize(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double v = std::floor(c[i] / side);
    if (!(std::abs(v) < 1e15)) return false;
    cell[i] = static_cast<std::int64_t>(v);
  }
  return true;
}

// Fixed-radius search: with side >= search radius, every partner lies in the
// 3^d block of cells around a point.
std::optional<NeighborLists> grid_neighbors(std::span<const Point> P, std::span<const Point> Q,
                                            const DistanceMatcher& matcher, bool certify) {
  if (Q.empty() || P.empty()) return NeighborLists(P.size());
  const std::size_t dim = Q.front().dim();
  const double side = std::sqrt(matcher.search_radius2()) * (1.0 + 1e-9) + 1e-300;
  CellMap cells;
  std::vector<std::int64_t> cell;
  for (std::size_t j = 0; j < Q.size(); ++j) {
    if (!cell_of(Q[j], side, cell)) return std::nullopt;
    cells[cell].push_back(static_cast<std::uint32_t>(j));
  }
  NeighborLists out(P.size());
  std::vector<std::int64_t> probe(dim);
  std::vector<int> offset(dim);
  for (std::size_t i = 0; i < P.size(); ++i) {
    if (P[i].dim() != dim) throw DimensionMismatch("dimension mismatch in neighbor search");
    if (!cell_of(P[i], side, cell)) return std::nullopt;
    std::fill(offset.begin(), offset.end(), -1);
    while (true) {
      for (std::size_t d = 0; d < dim; ++d) probe[d] = cell[d] + offset[d];
      if (auto it = cells.find(probe); it != cells.end()) {
        for (auto j : it->second) {
          if (matcher(P[i], Q[j])) {
            out[i].push_back(j);
          } else if (certify && matcher.in_guard_band(P[i], Q[j])) {
            throw SeparationFailure("pair within the tolerance guard band of " + matcher.d2().str());
          }
        }
      }
      std::size_t d = 0;
      while (d < dim && offset[d] == 1) offset[d++] = -1;
      if (d == dim) break;
      ++offset[d];
    }
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

// Adds small counts into a BigInt without overflowing a machine word.
class Accumulator {
 public:
  void add(std::uint64_t v) {
    if (v > std::numeric_limits<std::uint64_t>::max() - small_) flush();
    small_ += v;
  }
  BigInt take() {
    flush();
    return std::move(big_);
  }

 private:
  void flush() {
    big_ += BigInt(static_cast<unsigned long>(small_));
    small_ = 0;
  }
  std::uint64_t small_ = 0;
  BigInt big_ = 0;
};

// Splits [0, n) into contiguous blocks, one per worker, and sums the parts
// in block order.
BigInt parallel_sum(std::size_t n, unsigned threads,
                    const std::function<BigInt(std::size_t, std::size_t)>& part) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) return part(0, n);
  std::vector<BigInt> partial(threads);
  std::vector<std::thread> workers;
  const std::size_t block = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(n, t * block);
    const std::size_t end = std::min(n, begin + block);
    workers.emplace_back([&, t, begin, end] { partial[t] = part(begin, end); });
  }
  for (auto& w : workers) w.join();
  BigInt total = 0;
  for (const auto& p : partial) total += p;
  return total;
}

void check_mode_matches(std::span<const Point> points, const ComparisonMode& mode) {
  for (const auto& p : points) {
    if (p.kind() != mode.scalar_kind()) {
      throw InvalidConfig(mode.is_exact() ? "exact mode needs rational coordinates"
                                          : "tolerant mode needs floating coordinates");
    }
  }
}

}  // namespace

NeighborLists neighbor_lists(std::span<const Point> P, std::span<const Point> Q,
                             const DistanceMatcher& matcher, AdjacencyStrategy strategy, bool certify) {
  if (strategy == AdjacencyStrategy::automatic) {
    strategy = P.size() * Q.size() <= kBruteForceLimit ? AdjacencyStrategy::brute : AdjacencyStrategy::grid;
  }
  if (strategy == AdjacencyStrategy::grid) {
    if (auto lists = grid_neighbors(P, Q, matcher, certify)) return std::move(*lists);
  }
  return brute_neighbors(P, Q, matcher, certify);
}

std::uint64_t BipartiteAdjacency::edge_count(std::size_t i) const {
  std::uint64_t out = 0;
  for (const auto& l : lists.at(i)) out += l.size();
  return out;
}

std::uint64_t BipartiteAdjacency::total_edges() const {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < lists.size(); ++i) out += edge_count(i);
  return out;
}

BipartiteAdjacency build_adjacency(const LayeredConfig& config, AdjacencyStrategy strategy) {
  BipartiteAdjacency adj;
  adj.lists.reserve(config.k());
  for (std::size_t i = 0; i < config.k(); ++i) {
    const DistanceMatcher matcher(config.spec().delta2[i], config.mode());
    adj.lists.push_back(neighbor_lists(config.layer(i), config.layer(i + 1), matcher, strategy));
  }
  return adj;
}

IdentityIndex identity_index(std::span<const PointSet> layers) {
  IdentityIndex out;
  std::map<Point, std::uint32_t, PointIdentityLess> seen;
  out.ids.resize(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    out.ids[i].reserve(layers[i].size());
    for (const auto& p : layers[i]) {
      auto [it, inserted] = seen.emplace(p, static_cast<std::uint32_t>(seen.size()));
      out.ids[i].push_back(it->second);
    }
  }
  out.count = seen.size();
  return out;
}

BigInt count_walks(const LayeredConfig& config, const CountOptions& options) {
  return count_walks(config, build_adjacency(config, options.strategy), options.threads);
}

BigInt count_walks(const LayeredConfig& config, const BipartiteAdjacency& adjacency, unsigned threads) {
  const std::size_t k = config.k();
  const auto part = [&](std::size_t begin, std::size_t end) {
    std::vector<BigInt> current(config.layer(0).size(), 0);
    for (std::size_t p = begin; p < end; ++p) current[p] = 1;
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<BigInt> next(config.layer(i + 1).size(), 0);
      for (std::size_t p = 0; p < current.size(); ++p) {
        if (current[p] == 0) continue;
        for (auto q : adjacency.lists[i][p]) next[q] += current[p];
      }
      current = std::move(next);
    }
    BigInt total = 0;
    for (const auto& c : current) total += c;
    return total;
  };
  return parallel_sum(config.layer(0).size(), threads, part);
}

BigInt count_chains(const LayeredConfig& config, const CountOptions& options) {
  return count_chains(config, build_adjacency(config, options.strategy), options.threads);
}

BigInt count_chains(const LayeredConfig& config, const BipartiteAdjacency& adjacency, unsigned threads) {
  const std::size_t k = config.k();
  std::vector<PointSet> layers;
  for (const auto& l : config.layers()) layers.push_back(l.points);
  const IdentityIndex identity = identity_index(layers);
  if (k == 0) return BigInt(static_cast<unsigned long>(config.layer(0).size()));

  // identity -> index within the last layer, or -1.
  std::vector<std::int64_t> in_last(identity.count, -1);
  for (std::size_t q = 0; q < identity.ids[k].size(); ++q) in_last[identity.ids[k][q]] = static_cast<std::int64_t>(q);

  const auto part = [&](std::size_t begin, std::size_t end) {
    Accumulator acc;
    std::vector<std::uint32_t> path(k + 1);
    const auto on_path = [&](std::size_t level, std::uint32_t id) {
      for (std::size_t j = 0; j <= level; ++j) {
        if (path[j] == id) return true;
      }
      return false;
    };
    // Point p of layer i sits at path[i].
    std::function<void(std::size_t, std::uint32_t)> extend = [&](std::size_t i, std::uint32_t p) {
      const auto& next = adjacency.lists[i][p];
      if (i + 1 == k) {
        std::uint64_t count = next.size();
        for (std::size_t j = 0; j <= i; ++j) {
          const auto q = in_last[path[j]];
          if (q >= 0 && std::binary_search(next.begin(), next.end(), static_cast<std::uint32_t>(q))) --count;
        }
        acc.add(count);
        return;
      }
      for (auto q : next) {
        const auto id = identity.ids[i + 1][q];
        if (on_path(i, id)) continue;
        path[i + 1] = id;
        extend(i + 1, q);
      }
    };
    for (std::size_t p = begin; p < end; ++p) {
      path[0] = identity.ids[0][p];
      extend(0, static_cast<std::uint32_t>(p));
    }
    return acc.take();
  };
  return parallel_sum(config.layer(0).size(), threads, part);
}

std::uint64_t count_incidences(std::span<const Point> P, std::span<const Point> Q, const Rational& d2,
                               const ComparisonMode& mode, AdjacencyStrategy strategy) {
  check_mode_matches(P, mode);
  check_mode_matches(Q, mode);
  const auto lists = neighbor_lists(P, Q, DistanceMatcher(d2, mode), strategy);
  std::uint64_t total = 0;
  for (const auto& l : lists) total += l.size();
  return total;
}

void LabeledTree::validate() const {
  if (vertex_count == 0) throw InvalidConfig("tree needs at least one vertex");
  if (edges.size() + 1 != vertex_count) throw InvalidConfig("tree on n vertices needs n-1 edges");
  std::vector<std::size_t> parent(vertex_count);
  std::iota(parent.begin(), parent.end(), 0);
  const std::function<std::size_t(std::size_t)> find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& e : edges) {
    if (e.a >= vertex_count || e.b >= vertex_count) throw InvalidConfig("edge endpoint out of range");
    if (e.a == e.b) throw InvalidConfig("self loop in tree");
    if (e.d2.sign() <= 0) throw InvalidConfig("edge squared distance must be positive");
    const auto ra = find(e.a);
    const auto rb = find(e.b);
    if (ra == rb) throw InvalidConfig("edge list contains a cycle");
    parent[ra] = rb;
  }
}

LabeledTree LabeledTree::path(std::span<const Rational> delta2) {
  LabeledTree tree;
  tree.vertex_count = delta2.size() + 1;
  for (std::size_t i = 0; i < delta2.size(); ++i) tree.edges.push_back({i, i + 1, delta2[i]});
  return tree;
}

BigInt count_tree_embeddings(std::span<const PointSet> layers, const LabeledTree& tree,
                             const ComparisonMode& mode, const CountOptions& options) {
  tree.validate();
  if (layers.size() != tree.vertex_count) throw InvalidConfig("need one layer per tree vertex");
  for (const auto& l : layers) check_mode_matches(l, mode);
  const std::size_t n = tree.vertex_count;
  if (n == 1) return BigInt(static_cast<unsigned long>(layers[0].size()));

  // Breadth-first order from vertex 0; every later vertex hangs off an
  // earlier one.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> incident(n);
  for (std::size_t e = 0; e < tree.edges.size(); ++e) {
    incident[tree.edges[e].a].push_back({tree.edges[e].b, e});
    incident[tree.edges[e].b].push_back({tree.edges[e].a, e});
  }
  std::vector<std::size_t> order{0};
  std::vector<std::size_t> parent_pos(n, 0);  // position in order of the parent
  std::vector<NeighborLists> candidates(n);   // indexed by position
  std::vector<bool> placed(n, false);
  placed[0] = true;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const std::size_t v = order[head];
    for (auto [w, e] : incident[v]) {
      if (placed[w]) continue;
      placed[w] = true;
      parent_pos[order.size()] = head;
      const DistanceMatcher matcher(tree.edges[e].d2, mode);
      candidates[order.size()] = neighbor_lists(layers[v], layers[w], matcher, options.strategy);
      order.push_back(w);
    }
  }

  const IdentityIndex identity = identity_index(layers);
  const std::size_t last_vertex = order.back();
  std::vector<std::int64_t> in_last(identity.count, -1);
  for (std::size_t q = 0; q < identity.ids[last_vertex].size(); ++q) {
    in_last[identity.ids[last_vertex][q]] = static_cast<std::int64_t>(q);
  }

  const auto part = [&](std::size_t begin, std::size_t end) {
    Accumulator acc;
    std::vector<std::uint32_t> chosen(n);  // point index per position
    std::vector<std::uint32_t> used(n);    // identity per position
    std::function<void(std::size_t)> place = [&](std::size_t pos) {
      const auto& options_here = candidates[pos][chosen[parent_pos[pos]]];
      if (pos + 1 == n) {
        std::uint64_t count = options_here.size();
        for (std::size_t j = 0; j < pos; ++j) {
          const auto q = in_last[used[j]];
          if (q >= 0 && std::binary_search(options_here.begin(), options_here.end(), static_cast<std::uint32_t>(q))) {
            --count;
          }
        }
        acc.add(count);
        return;
      }
      const std::size_t v = order[pos];
      for (auto q : options_here) {
        const auto id = identity.ids[v][q];
        if (std::find(used.begin(), used.begin() + static_cast<std::ptrdiff_t>(pos), id) !=
            used.begin() + static_cast<std::ptrdiff_t>(pos)) {
          continue;
        }
        chosen[pos] = q;
        used[pos] = id;
        place(pos + 1);
      }
    };
    for (std::size_t r = begin; r < end; ++r) {
      chosen[0] = static_cast<std::uint32_t>(r);
      used[0] = identity.ids[0][r];
      place(1);
    }
    return acc.take();
  };
  return parallel_sum(layers[0].size(), options.threads, part);
}

BigInt count_tree_embeddings(const PointSet& points, const LabeledTree& tree, const ComparisonMode& mode,
                             const CountOptions& options) {
  std::vector<PointSet> layers(tree.vertex_count, points);
  return count_tree_embeddings(layers, tree, mode, options);
}

}  // namespace chain_census
