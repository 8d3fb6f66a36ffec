#include "chain_census/richness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace chain_census {
namespace {

using Members = std::vector<std::vector<std::uint32_t>>;

struct Graph {
  std::vector<NeighborLists> fwd;   // layer i -> layer i+1
  std::vector<NeighborLists> back;  // layer i+1 -> layer i
};

Graph build_graph(const LayeredConfig& config) {
  Graph g;
  g.fwd = build_adjacency(config).lists;
  g.back.resize(g.fwd.size());
  for (std::size_t i = 0; i < g.fwd.size(); ++i) {
    g.back[i].assign(config.layer(i + 1).size(), {});
    for (std::size_t p = 0; p < g.fwd[i].size(); ++p) {
      for (auto q : g.fwd[i][p]) g.back[i][q].push_back(static_cast<std::uint32_t>(p));
    }
  }
  return g;
}

Members all_members(const LayeredConfig& config) {
  Members m(config.layer_count());
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i].resize(config.layer(i).size());
    for (std::size_t p = 0; p < m[i].size(); ++p) m[i][p] = static_cast<std::uint32_t>(p);
  }
  return m;
}

BigInt product(const Members& m) {
  BigInt out(1);
  for (const auto& layer : m) out *= static_cast<unsigned long>(layer.size());
  return out;
}

// Richness of point p of layer `layer` toward the chosen points of its
// filtered neighbour layer.
std::uint64_t richness(const Graph& g, int parity, std::size_t layer, std::uint32_t p,
                       const std::vector<char>& chosen) {
  const auto& list = parity == 1 ? g.back[layer - 1][p] : g.fwd[layer][p];
  std::uint64_t r = 0;
  for (auto q : list) r += chosen[q] ? 1 : 0;
  return r;
}

std::vector<char> bitmap(const std::vector<std::uint32_t>& members, std::size_t size) {
  std::vector<char> out(size, 0);
  for (auto p : members) out[p] = 1;
  return out;
}

// Class index a with n^(a eps) <= r < n^((a+1) eps), or -1.
class ClassIndex {
 public:
  ClassIndex(std::uint64_t n, Rational eps) : n_(static_cast<unsigned long>(n)), eps_(std::move(eps)) {
    amax_ = (Rational(1) / eps_).floor().get_si();
  }
  long of(std::uint64_t r) {
    if (r == 0) return -1;
    auto it = cache_.find(r);
    if (it != cache_.end()) return it->second;
    long found = -1;
    const BigInt value(static_cast<unsigned long>(r));
    for (long a = 0; a <= amax_; ++a) {
      if (at_least_power(value, n_, eps_ * Rational(a)) && below_power(value, n_, eps_ * Rational(a + 1))) {
        found = a;
        break;
      }
    }
    cache_.emplace(r, found);
    return found;
  }
  long amax() const { return amax_; }

 private:
  BigInt n_;
  Rational eps_;
  long amax_ = 0;
  std::unordered_map<std::uint64_t, long> cache_;
};

struct Child {
  std::vector<long> alpha;  // class index per layer; pinned end is 0
  Members members;
};

// Every nonempty product D(parity, members, alpha) over alpha in the grid,
// in lexicographic order of the filtered layers' class indices.
std::vector<Child> expand(const Graph& g, int parity, const Members& members, ClassIndex& classes,
                          const std::vector<std::size_t>& layer_sizes) {
  const std::size_t count = members.size();
  std::vector<Child> out;
  Child current;
  current.alpha.assign(count, 0);
  current.members.assign(count, {});
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = parity == 1 ? i : count - 1 - i;
  current.members[order[0]] = members[order[0]];

  std::function<void(std::size_t)> step = [&](std::size_t pos) {
    if (pos == count) {
      out.push_back(current);
      return;
    }
    const std::size_t layer = order[pos];
    const std::size_t prev = order[pos - 1];
    const auto chosen = bitmap(current.members[prev], layer_sizes[prev]);
    std::map<long, std::vector<std::uint32_t>> groups;
    for (auto p : members[layer]) {
      const long a = classes.of(richness(g, parity, layer, p, chosen));
      if (a >= 0) groups[a].push_back(p);
    }
    for (auto& [a, pts] : groups) {
      current.alpha[layer] = a;
      current.members[layer] = std::move(pts);
      step(pos + 1);
    }
    current.alpha[layer] = 0;
    current.members[layer].clear();
  };
  step(1);
  return out;
}

bool stable(const BigInt& child, const BigInt& parent, std::uint64_t n, const Rational& eps) {
  // child >= parent n^-eps  <=>  child^q n^p >= parent^q
  const auto p = eps.numerator().get_ui();
  const auto q = eps.denominator().get_ui();
  return big_pow(child, q) * big_pow(BigInt(static_cast<unsigned long>(n)), p) >= big_pow(parent, q);
}

std::vector<std::size_t> layer_sizes(const LayeredConfig& config) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < config.layer_count(); ++i) out.push_back(config.layer(i).size());
  return out;
}

}  // namespace

PointSet rich_points(const PointSet& target, const PointSet& reference, const Rational& d2, std::uint64_t r,
                     const ComparisonMode& mode) {
  if (r < 1) throw std::invalid_argument("richness threshold must be >= 1");
  const NeighborLists adj = neighbor_lists(target, reference, DistanceMatcher(d2, mode));
  PointSet out;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (adj[i].size() >= r) out.push_back(target[i]);
  }
  return out;
}

std::vector<RichnessClass> dyadic_partition(const PointSet& target, const PointSet& reference, const Rational& d2,
                                            const ComparisonMode& mode) {
  const NeighborLists adj = neighbor_lists(target, reference, DistanceMatcher(d2, mode));
  const double log_n = std::log(static_cast<double>(std::max<std::size_t>(2, reference.size())));
  std::map<int, RichnessClass> classes;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const std::uint64_t deg = adj[i].size();
    if (deg == 0) continue;
    const int level = std::bit_width(deg) - 1;
    auto& cls = classes[level];
    if (cls.points.empty()) {
      cls.lo = std::uint64_t{1} << level;
      cls.hi = std::uint64_t{1} << (level + 1);
      cls.alpha = std::log(static_cast<double>(cls.lo)) / log_n;
    }
    cls.points.push_back(target[i]);
  }
  std::vector<RichnessClass> out;
  for (auto& [level, cls] : classes) out.push_back(std::move(cls));
  return out;
}

std::uint64_t covering_reference_size(const LayeredConfig& config) {
  return std::max<std::uint64_t>(2, config.max_layer_size());
}

LayeredConfig operator_D(int parity, const LayeredConfig& config, const std::vector<Rational>& alpha,
                         const Rational& eps, std::uint64_t n_ref) {
  if (parity != 0 && parity != 1) throw std::invalid_argument("parity must be 0 or 1");
  if (alpha.size() != config.layer_count()) throw std::invalid_argument("alpha needs one entry per layer");
  if (eps.sign() <= 0) throw std::invalid_argument("eps must be positive");
  if (n_ref < 1) throw std::invalid_argument("reference size must be positive");
  const Graph g = build_graph(config);
  const auto sizes = layer_sizes(config);
  const std::size_t count = config.layer_count();
  const BigInt n(static_cast<unsigned long>(n_ref));

  Members members(count);
  std::vector<PointSet> layers(count);
  for (std::size_t pos = 0; pos < count; ++pos) {
    const std::size_t layer = parity == 1 ? pos : count - 1 - pos;
    if (pos == 0) {
      for (std::size_t p = 0; p < sizes[layer]; ++p) members[layer].push_back(static_cast<std::uint32_t>(p));
    } else {
      const std::size_t prev = parity == 1 ? layer - 1 : layer + 1;
      const auto chosen = bitmap(members[prev], sizes[prev]);
      for (std::size_t p = 0; p < sizes[layer]; ++p) {
        const BigInt r(static_cast<unsigned long>(richness(g, parity, layer, static_cast<std::uint32_t>(p), chosen)));
        if (at_least_power(r, n, alpha[layer]) && below_power(r, n, alpha[layer] + eps)) {
          members[layer].push_back(static_cast<std::uint32_t>(p));
        }
      }
    }
    for (auto p : members[layer]) layers[layer].push_back(config.layer(layer)[p]);
  }
  return config.with_layers(std::move(layers));
}

bool DecompositionSequence::contains(const std::vector<std::uint32_t>& tuple) const {
  if (tuple.size() != members.size()) return false;
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (!std::binary_search(members[i].begin(), members[i].end(), tuple[i])) return false;
  }
  return true;
}

bool Covering::lengths_bounded(std::size_t k) const {
  // length <= (k+1)/eps + 1  <=>  (length - 1) eps <= k+1
  for (const auto& s : sequences) {
    const long len = static_cast<long>(s.length());
    if (Rational(len - 1) * eps > Rational(static_cast<long>(k + 1))) return false;
  }
  return true;
}

Covering stable_covering(const LayeredConfig& config, const Rational& eps, std::size_t max_sequences) {
  if (eps.sign() <= 0 || eps > Rational(1)) throw std::invalid_argument("eps must lie in (0, 1]");
  Covering out;
  out.n_ref = covering_reference_size(config);
  out.eps = eps;
  const Graph g = build_graph(config);
  const auto sizes = layer_sizes(config);
  ClassIndex classes(out.n_ref, eps);

  struct Node {
    std::vector<std::vector<Rational>> gamma;
    std::vector<BigInt> sizes;
    Members members;
  };
  std::map<std::pair<int, Members>, std::vector<Child>> memo;
  std::deque<Node> queue;
  {
    Node root;
    root.members = all_members(config);
    root.sizes.push_back(product(root.members));
    if (root.sizes.back() == 0) return out;
    queue.push_back(std::move(root));
  }
  while (!queue.empty()) {
    Node node = std::move(queue.front());
    queue.pop_front();
    const int parity = static_cast<int>((node.gamma.size() + 1) % 2);
    auto key = std::make_pair(parity, node.members);
    auto it = memo.find(key);
    if (it == memo.end()) {
      it = memo.emplace(std::move(key), expand(g, parity, node.members, classes, sizes)).first;
      ++out.expanded;
    }
    for (const auto& child : it->second) {
      Node next;
      next.gamma = node.gamma;
      std::vector<Rational> alpha;
      alpha.reserve(child.alpha.size());
      for (long a : child.alpha) alpha.push_back(eps * Rational(a));
      next.gamma.push_back(std::move(alpha));
      next.sizes = node.sizes;
      next.sizes.push_back(product(child.members));
      next.members = child.members;
      if (stable(next.sizes.back(), node.sizes.back(), out.n_ref, eps)) {
        DecompositionSequence seq;
        seq.gamma = std::move(next.gamma);
        seq.stable_at_last = true;
        seq.class_sizes = std::move(next.sizes);
        seq.members = std::move(next.members);
        out.sequences.push_back(std::move(seq));
      } else {
        queue.push_back(std::move(next));
      }
      if (out.sequences.size() + queue.size() > max_sequences) {
        throw CoveringTooLarge("covering exceeds the sequence limit");
      }
    }
  }
  return out;
}

RichnessReport check_richness_bound(const PointSet& P, const PointSet& Q, const Rational& d2,
                                    const ComparisonMode& mode) {
  RichnessReport out;
  out.total_incidences = count_incidences(P, Q, d2, mode);
  const NeighborLists adj = neighbor_lists(Q, P, DistanceMatcher(d2, mode));
  std::set<std::uint64_t> realized;
  for (const auto& row : adj) {
    if (!row.empty()) realized.insert(row.size());
  }
  for (std::uint64_t r : realized) {
    const PointSet rich = rich_points(Q, P, d2, r, mode);
    RichnessRow row{r, rich.size(), count_incidences(P, rich, d2, mode)};
    if (!(row.r * row.rich <= row.incidences && row.incidences <= out.total_incidences)) out.holds = false;
    if (row.incidences > 0) {
      out.tightest_ratio = std::max(out.tightest_ratio, static_cast<double>(row.r * row.rich) /
                                                            static_cast<double>(row.incidences));
    }
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace chain_census
