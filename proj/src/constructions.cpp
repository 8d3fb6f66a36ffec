#include "chain_census/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <string>

namespace chain_census {
namespace {

constexpr double kGoldenAngle = 2.399963229728653;

// Largest multiple of 2^-30 not above x (x > 0), falling back to the exact
// binary value for tiny x.
Rational dyadic_below(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("expected a positive finite length");
  const double scaled = std::floor(std::ldexp(x, 30));
  if (scaled < 1.0) return Rational::from_double(x);
  return Rational(BigInt(scaled), big_pow(BigInt(2), 30));
}

double root(const Rational& r2) { return std::sqrt(r2.to_double()); }

Point origin2_exact() { return Point::exact({Rational(0), Rational(0)}); }

PointSet to_floating(const PointSet& points) {
  PointSet out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.to_floating());
  return out;
}

Point translate(const Point& p, const std::vector<double>& v) {
  std::vector<double> c = p.float_coords();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += v[i];
  return Point::floating(std::move(c), p.id());
}

PointSet translate(const PointSet& points, const std::vector<double>& v) {
  PointSet out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(translate(p, v));
  return out;
}

// n float points on the circle |z - c|^2 = r2 around direction phi, chord
// diameter at most diam.
PointSet float_arc(const Point& c, double r2, double phi, std::size_t n, double diam) {
  const double r = std::sqrt(r2);
  const double span = n > 1 ? std::min(diam / r, 0.5) : 0.0;
  const double step = n > 1 ? span / static_cast<double>(n - 1) : 0.0;
  const auto& cc = c.float_coords();
  PointSet out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = phi - span / 2 + step * static_cast<double>(i);
    out.push_back(Point::floating({cc[0] + r * std::cos(theta), cc[1] + r * std::sin(theta)},
                                  static_cast<std::int64_t>(i)));
  }
  return out;
}

// n exact points on |z - c|^2 = r2 with parameters in [t0, t0 + span].
PointSet exact_arc(const Point& c, const Rational& r2, const Rational& t0, std::size_t n, double diam) {
  const BigInt r_up = ceil_sqrt(Rational(r2).ceil());
  double span = diam / (2.0 * r_up.get_d());
  span = std::min(span, 0.25);
  const Rational t1 = n > 1 ? t0 + dyadic_below(span) : t0;
  return rational_circle_points(c, r2, n, t0, t1);
}

// Points along a segment from the origin, total length at most diam.
PointSet small_segment(std::size_t n, double diam, bool exact) {
  PointSet out;
  out.reserve(n);
  const double step = n > 1 ? diam / static_cast<double>(n - 1) : 0.0;
  const Rational h = n > 1 ? dyadic_below(step) : Rational(0);
  for (std::size_t i = 0; i < n; ++i) {
    if (exact) {
      out.push_back(Point::exact({h * Rational(static_cast<long>(i)), Rational(0)}, static_cast<std::int64_t>(i)));
    } else {
      out.push_back(Point::floating({step * static_cast<double>(i), 0.0}, static_cast<std::int64_t>(i)));
    }
  }
  return out;
}

bool has_rational_point(const Rational& r2) { return find_rational_point_on_circle(r2).has_value(); }

// Every point of layers[first..] is farther than sqrt(min_d2) from every
// point of a different layer.
bool separated_from_rest(const std::vector<PointSet>& layers, std::size_t first, double min_d2) {
  for (std::size_t i = first; i < layers.size(); ++i) {
    for (std::size_t j = 0; j < layers.size(); ++j) {
      if (j >= i) continue;
      for (const auto& p : layers[i]) {
        for (const auto& q : layers[j]) {
          if (squared_distance_float(p, q) <= min_d2) return false;
        }
      }
    }
  }
  return true;
}

bool certifies(const std::vector<PointSet>& layers, const std::vector<Rational>& delta2, const ComparisonMode& mode) {
  try {
    for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
      neighbor_lists(layers[i], layers[i + 1], DistanceMatcher(delta2[i], mode));
    }
  } catch (const SeparationFailure&) {
    return false;
  }
  return true;
}

PointSet dedupe(const PointSet& points) {
  std::set<Point, PointIdentityLess> seen;
  PointSet out;
  for (const auto& p : points) {
    if (seen.insert(p).second) out.push_back(p);
  }
  renumber(out);
  return out;
}

std::vector<double> centroid(const std::vector<PointSet>& layers, std::size_t dim) {
  std::vector<double> c(dim, 0.0);
  std::size_t count = 0;
  for (const auto& layer : layers) {
    for (const auto& p : layer) {
      for (std::size_t i = 0; i < dim; ++i) c[i] += p.float_coords()[i];
      ++count;
    }
  }
  if (count > 0) {
    for (auto& x : c) x /= static_cast<double>(count);
  }
  return c;
}

// Appends the matched layer, the singleton x and an n-point arc. The last
// existing layer must have diameter <= min(delta_a, delta_b)/3, where
// delta_a, delta_b, delta_c are the next three distances.
void inductive_step(std::vector<PointSet>& layers, const std::vector<Rational>& delta2, std::size_t n,
                    double last_diam, const ComparisonMode& mode) {
  const std::size_t kcur = layers.size() - 1;
  const Rational& da2 = delta2.at(kcur);
  const Rational& db2 = delta2.at(kcur + 1);
  const Rational& dc2 = delta2.at(kcur + 2);
  const double da = root(da2), db = root(db2);
  const double e = std::min(da, db) / 3.0;
  const PointSet& last = layers.back();
  if (last.empty()) throw ConstructionError("inductive step needs a nonempty last layer");
  const Point& y = last.front();
  const auto& yc = y.float_coords();

  const double min_delta = std::sqrt(std::min({da2.to_double(), db2.to_double(), dc2.to_double()}));
  const double sep2 = std::pow(1e-6 * min_delta, 2);

  double base_phi = 0.0;
  {
    const auto c = centroid(layers, 2);
    const double vx = yc[0] - c[0], vy = yc[1] - c[1];
    if (vx * vx + vy * vy > 0.0) base_phi = std::atan2(vy, vx);
  }

  for (int turn = 0; turn < 32; ++turn) {
    const double phi = base_phi + kGoldenAngle * turn;
    const double ux = std::cos(phi), uy = std::sin(phi);
    for (int offset = 0; offset <= 8; ++offset) {
      const double dist = da + db - 2.0 * e + e * offset / 8.0;
      const Point x = Point::floating({yc[0] + dist * ux, yc[1] + dist * uy});

      PointSet matched;
      matched.reserve(last.size());
      bool ok = true;
      for (const auto& z : last) {
        PointSet hits = circle_circle_intersection(z, da2.to_double(), x, db2.to_double());
        if (hits.empty()) {
          ok = false;
          break;
        }
        matched.push_back(hits.front());
      }
      if (!ok) continue;

      std::vector<PointSet> trial = layers;
      trial.push_back(dedupe(matched));
      trial.push_back(PointSet{x});
      trial.push_back(float_arc(x, dc2.to_double(), phi, n, last_diam));
      if (!separated_from_rest(trial, layers.size(), sep2)) continue;
      if (!certifies(trial, delta2, mode)) continue;
      layers = std::move(trial);
      return;
    }
  }
  throw ConstructionError("no admissible position for the singleton layer");
}

// Diameter target for the layer ending at index kend (0-based chain length)
// so that the next inductive step applies.
double stage_diameter(std::size_t kend, std::size_t k, const std::vector<Rational>& delta2, double eps) {
  if (kend >= k) return eps;
  const double need = std::min(root(delta2[kend]), root(delta2[kend + 1])) / 3.0;
  return std::min(eps, need);
}

std::pair<Rational, std::uint64_t> popular_distance(const PointSet& points) {
  std::map<Rational, std::uint64_t> hist;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) ++hist[squared_distance_exact(points[i], points[j])];
  }
  if (hist.empty()) throw ConstructionError("need at least two points");
  auto best = hist.begin();
  for (auto it = hist.begin(); it != hist.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return {best->first, best->second};
}

std::uint64_t uniform_bits(std::mt19937_64& rng) { return rng() >> 11; }
double uniform01(std::mt19937_64& rng) { return std::ldexp(static_cast<double>(uniform_bits(rng)), -53); }

bool near_line(double v, double eta, double spacing, long& index) {
  const double s = (v - eta) / spacing;
  const double f = std::floor(s);
  const double frac = s - f;
  index = static_cast<long>(f);
  return frac < 1e-9 || frac > 1.0 - 1e-9;
}

BigInt pow_size(std::size_t base, std::size_t exponent) {
  return big_pow(BigInt(static_cast<unsigned long>(base)), static_cast<unsigned long>(exponent));
}

Rational max_diameter2(const PointSet& points) {
  Rational best(0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      Rational d = squared_distance_exact(points[i], points[j]);
      if (d > best) best = d;
    }
  }
  return best;
}

bool tree_certifies(const std::vector<PointSet>& layers, const LabeledTree& tree, const ComparisonMode& mode) {
  try {
    for (const auto& edge : tree.edges) {
      neighbor_lists(layers[edge.a], layers[edge.b], DistanceMatcher(edge.d2, mode));
    }
  } catch (const SeparationFailure&) {
    return false;
  }
  return true;
}

bool all_layers_separated(const std::vector<PointSet>& layers, double min_d2) {
  return separated_from_rest(layers, 0, min_d2);
}

}  // namespace

BigInt planar_chain_floor(std::size_t k, std::size_t n) { return pow_size(n, (k + 1) / 3 + 1); }

LayeredConfig gen_planar_chain(std::size_t k, const std::vector<Rational>& delta2, std::size_t n, double eps,
                               std::optional<ComparisonMode> mode) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("eps must be positive");
  if (delta2.size() != k) throw std::invalid_argument("need exactly k squared distances");
  for (const auto& d : delta2) {
    if (d.sign() <= 0) throw std::invalid_argument("squared distances must be positive");
  }

  const std::size_t k0 = k % 3;
  bool exact = k < 3;
  for (std::size_t i = 0; i < k0 && exact; ++i) exact = has_rational_point(delta2[i]);
  if (mode && mode->is_exact() && !exact) {
    throw NoRationalPoint(k >= 3 ? "exact mode unavailable for k >= 3"
                                 : "exact mode requested but a circle has no rational point");
  }
  if (mode && !mode->is_exact()) exact = false;
  const ComparisonMode tol = mode && !mode->is_exact() ? *mode : ComparisonMode::tolerant();

  const double base_diam = stage_diameter(k0, k, delta2, eps);
  std::vector<PointSet> layers;
  if (k0 == 0) {
    layers.push_back(small_segment(n, base_diam, exact));
  } else if (k0 == 1) {
    if (exact) {
      layers.push_back({origin2_exact()});
      layers.push_back(exact_arc(origin2_exact(), delta2[0], Rational(0), n, base_diam));
    } else {
      const Point o = Point::floating({0.0, 0.0});
      layers.push_back({o});
      layers.push_back(float_arc(o, delta2[0].to_double(), 0.0, n, base_diam));
    }
  } else {
    if (exact) {
      const Point o = origin2_exact();
      layers.push_back(exact_arc(o, delta2[0], Rational(0), n, base_diam));
      layers.push_back({o});
      layers.push_back(exact_arc(o, delta2[1], Rational(1), n, base_diam));
    } else {
      const Point o = Point::floating({0.0, 0.0});
      layers.push_back(float_arc(o, delta2[0].to_double(), std::numbers::pi, n, base_diam));
      layers.push_back({o});
      layers.push_back(float_arc(o, delta2[1].to_double(), 0.0, n, base_diam));
    }
  }

  if (exact) {
    return LayeredConfig(std::move(layers), DistanceSpec{delta2, ComparisonMode::exact()}, 2);
  }
  for (auto& layer : layers) layer = to_floating(layer);
  for (std::size_t kend = k0; kend < k; kend += 3) {
    inductive_step(layers, delta2, n, stage_diameter(kend + 3, k, delta2, eps), tol);
  }
  return LayeredConfig(std::move(layers), DistanceSpec{delta2, tol}, 2);
}

UnitRichGrid gen_unit_rich_grid(std::size_t m) {
  if (m < 4) throw std::invalid_argument("grid needs m >= 4");
  const auto side = static_cast<std::size_t>(ceil_sqrt(BigInt(static_cast<unsigned long>(m))).get_ui());
  UnitRichGrid out;
  out.points.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    out.points.push_back(Point::exact({Rational(static_cast<long>(i % side)), Rational(static_cast<long>(i / side))},
                                      static_cast<std::int64_t>(i)));
  }
  auto [d2, count] = popular_distance(out.points);
  out.popular_d2 = d2;
  out.pair_count = count;
  return out;
}

Rational SplitResult::floor() const {
  const auto m = static_cast<long>(cells_per_side);
  return Rational(BigInt(static_cast<unsigned long>(original_incidences)), BigInt(2 * m * m));
}

bool SplitResult::meets_floor() const {
  return Rational(BigInt(static_cast<unsigned long>(preserved_incidences)), BigInt(1)) >= floor();
}

SplitResult split_and_translate(const PointSet& x1, const PointSet& x2, const Rational& d2, double eps,
                                std::uint64_t seed) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("eps must be positive");
  if (d2.sign() <= 0) throw std::invalid_argument("squared distance must be positive");
  for (const auto* set : {&x1, &x2}) {
    for (const auto& p : *set) {
      if (!p.is_exact() || p.dim() != 2) throw std::invalid_argument("split needs exact planar points");
    }
  }
  for (const auto* set : {&x1, &x2}) {
    std::set<Point, PointIdentityLess> unique(set->begin(), set->end());
    if (unique.size() != set->size()) throw std::invalid_argument("split inputs must not repeat points");
  }
  const ComparisonMode exact = ComparisonMode::exact();
  const NeighborLists adj = neighbor_lists(x1, x2, DistanceMatcher(d2, exact));
  std::uint64_t edges = 0;
  for (const auto& row : adj) edges += row.size();
  if (edges == 0) throw ConstructionError("no edges at the given distance between the two sets");

  const double delta = root(d2);
  const double spacing = 10.0 * delta;
  std::mt19937_64 rng(seed);

  struct Squares {
    std::vector<std::pair<long, long>> s1, s2;
  };
  auto assign = [&](double eta_x, double eta_y, Squares& sq) {
    sq.s1.resize(x1.size());
    sq.s2.resize(x2.size());
    for (int which = 0; which < 2; ++which) {
      const PointSet& set = which == 0 ? x1 : x2;
      auto& dst = which == 0 ? sq.s1 : sq.s2;
      for (std::size_t i = 0; i < set.size(); ++i) {
        long a = 0, b = 0;
        if (near_line(set[i].float_coords()[0], eta_x, spacing, a)) return false;
        if (near_line(set[i].float_coords()[1], eta_y, spacing, b)) return false;
        dst[i] = {a, b};
      }
    }
    return true;
  };

  SplitResult out;
  double best_x = 0.0, best_y = 0.0;
  std::uint64_t best_cut = std::numeric_limits<std::uint64_t>::max();
  Squares best_sq;
  constexpr std::size_t kMinTrials = 64;
  constexpr std::size_t kMaxTrials = 4096;
  for (std::size_t trial = 0; trial < kMaxTrials; ++trial) {
    if (trial >= kMinTrials && best_cut != std::numeric_limits<std::uint64_t>::max() &&
        2 * (edges - best_cut) >= edges) {
      break;
    }
    const double eta_x = uniform01(rng) * spacing;
    const double eta_y = uniform01(rng) * spacing;
    ++out.offsets_tried;
    Squares sq;
    if (!assign(eta_x, eta_y, sq)) continue;
    std::uint64_t cut = 0;
    for (std::size_t p = 0; p < adj.size(); ++p) {
      for (auto q : adj[p]) {
        if (sq.s1[p] != sq.s2[q]) ++cut;
      }
    }
    if (cut < best_cut) {
      best_cut = cut;
      best_x = eta_x;
      best_y = eta_y;
      best_sq = std::move(sq);
    }
  }
  if (best_cut == std::numeric_limits<std::uint64_t>::max() || 2 * (edges - best_cut) < edges) {
    throw ConstructionError("no grid offset keeps half of the edges");
  }
  out.original_incidences = edges;
  out.uncut_incidences = edges - best_cut;

  std::map<std::pair<long, long>, long> square_index;
  for (const auto& s : best_sq.s1) square_index.emplace(s, 0);
  for (const auto& s : best_sq.s2) square_index.emplace(s, 0);
  {
    long i = 0;
    for (auto& [key, idx] : square_index) idx = i++;
  }
  const auto square_count = static_cast<long>(square_index.size());

  // Corners rounded down to a dyadic grid of resolution <= delta/64.
  const long q_bits = std::max(0L, static_cast<long>(std::ceil(std::log2(64.0 / delta))));
  const BigInt q_scale = big_pow(BigInt(2), static_cast<unsigned long>(q_bits));
  const double q_double = std::ldexp(1.0, static_cast<int>(q_bits));
  auto corner = [&](long index, double eta) {
    const double c = eta + static_cast<double>(index) * spacing;
    return Rational(BigInt(std::floor(c * q_double)), q_scale);
  };

  PointSet t1, t2;
  for (int attempt = 0;; ++attempt) {
    if (attempt == 8) throw ConstructionError("translated squares keep colliding");
    const Rational h = dyadic_below(delta / (8.0 * static_cast<double>(square_count) * (attempt + 1)));
    std::map<std::pair<long, long>, std::array<Rational, 2>> shift;
    for (const auto& [key, idx] : square_index) {
      const Rational j = h * Rational(idx);
      shift[key] = {j - corner(key.first, best_x), j * Rational(2) - corner(key.second, best_y)};
    }
    auto move = [&](const PointSet& set, const std::vector<std::pair<long, long>>& sq) {
      PointSet moved;
      moved.reserve(set.size());
      for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& s = shift.at(sq[i]);
        const auto& c = set[i].rational_coords();
        moved.push_back(Point::exact({c[0] + s[0], c[1] + s[1]}, set[i].id()));
      }
      return moved;
    };
    t1 = move(x1, best_sq.s1);
    t2 = move(x2, best_sq.s2);
    // Distinct inputs must stay distinct; points shared by x1 and x2 stay shared.
    std::set<Point, PointIdentityLess> seen1(t1.begin(), t1.end()), seen2(t2.begin(), t2.end());
    if (seen1.size() == t1.size() && seen2.size() == t2.size()) break;
  }

  const double cells_exact = std::ceil(22.0 / eps);
  const auto cells = static_cast<std::size_t>(cells_exact);
  out.cells_per_side = cells;
  const double box = 11.0 * delta;
  auto cell_of = [&](const Point& p) {
    std::size_t idx[2];
    for (int a = 0; a < 2; ++a) {
      const double v = std::floor(p.float_coords()[a] * static_cast<double>(cells) / box);
      idx[a] = static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(cells - 1)));
    }
    return idx[0] * cells + idx[1];
  };

  std::map<std::size_t, std::uint64_t> weight;
  for (std::size_t p = 0; p < adj.size(); ++p) {
    for (auto q : adj[p]) {
      if (best_sq.s1[p] == best_sq.s2[q]) ++weight[cell_of(t2[q])];
    }
  }
  std::size_t best_cell = 0;
  std::uint64_t best_weight = 0;
  for (const auto& [cell, w] : weight) {
    if (w > best_weight) {
      best_weight = w;
      best_cell = cell;
    }
  }

  out.x1 = t1;
  for (const auto& p : t2) {
    if (cell_of(p) == best_cell) out.x2.push_back(p);
  }
  renumber(out.x1);
  renumber(out.x2);
  out.preserved_incidences = count_incidences(out.x1, out.x2, d2, exact);
  out.diameter2 = max_diameter2(out.x2);
  out.normalized_diameter = std::sqrt(out.diameter2.to_double()) / delta;
  return out;
}

K1Mod3Result gen_planar_k1mod3(std::size_t k, std::size_t n, double eps, std::uint64_t seed,
                               std::optional<std::vector<Rational>> tail_delta2) {
  if (k % 3 != 1) throw std::invalid_argument("k must be 1 mod 3");
  const UnitRichGrid grid = gen_unit_rich_grid(n);
  SplitResult split = split_and_translate(grid.points, grid.points, grid.popular_d2, eps, seed);

  std::vector<Rational> delta2{grid.popular_d2};
  if (k > 1) {
    if (tail_delta2) {
      if (tail_delta2->size() != k - 1) throw std::invalid_argument("tail needs k-1 squared distances");
      delta2.insert(delta2.end(), tail_delta2->begin(), tail_delta2->end());
    } else {
      const BigInt nine_diam = (Rational(9) * split.diameter2).ceil();
      BigInt side = ceil_sqrt(nine_diam);
      if (side < 1) side = 1;
      const Rational d(side * side, BigInt(1));
      delta2.insert(delta2.end(), k - 1, d);
    }
    const Rational need = Rational(9) * split.diameter2;
    if (need > delta2[1] || need > delta2[2]) {
      throw ConstructionError("split diameter too large for the next two distances");
    }
  }

  const BigInt floor = pow_size(n, (k - 1) / 3) * BigInt(static_cast<unsigned long>(split.preserved_incidences));
  if (k == 1) {
    LayeredConfig config({split.x1, split.x2}, DistanceSpec{delta2, ComparisonMode::exact()}, 2);
    return {std::move(config), std::move(split), grid.popular_d2, floor};
  }
  const ComparisonMode tol = ComparisonMode::tolerant();
  std::vector<PointSet> layers{to_floating(split.x1), to_floating(split.x2)};
  for (std::size_t kend = 1; kend < k; kend += 3) {
    inductive_step(layers, delta2, n, stage_diameter(kend + 3, k, delta2, eps), tol);
  }
  LayeredConfig config(std::move(layers), DistanceSpec{delta2, tol}, 2);
  return {std::move(config), std::move(split), grid.popular_d2, floor};
}

LayeredConfig gen_3d_even(std::size_t k, const std::vector<Rational>& delta2, std::size_t n) {
  if (k < 2 || k % 2 != 0) throw std::invalid_argument("k must be even and >= 2");
  if (delta2.size() != k) throw std::invalid_argument("need exactly k squared distances");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  for (const auto& d : delta2) {
    if (d.sign() <= 0) throw std::invalid_argument("squared distances must be positive");
  }
  std::vector<double> r(k);
  for (std::size_t i = 0; i < k; ++i) r[i] = root(delta2[i]);

  // singleton for layer index 2j+1 (0-based) at x = pos[j]
  const std::size_t singles = k / 2;
  std::vector<double> pos(singles, 0.0);
  for (std::size_t j = 1; j < singles; ++j) {
    // sphere radii around neighbours: r[2j-1] and r[2j]
    pos[j] = pos[j - 1] + std::max(r[2 * j - 1], r[2 * j]);
  }
  auto single = [&](std::size_t j) { return Point::floating({pos[j], 0.0, 0.0}); };
  const double min_r = *std::min_element(r.begin(), r.end());
  const double sep2 = std::pow(1e-6 * min_r, 2);

  for (double cap : {std::numbers::pi / 4, std::numbers::pi / 5, std::numbers::pi / 3}) {
    std::vector<PointSet> layers(k + 1);
    layers[0] = sample_circle_3d(Circle3{{pos[0] - r[0] * std::cos(cap), 0.0, 0.0}, {1.0, 0.0, 0.0},
                                         std::pow(r[0] * std::sin(cap), 2)},
                                 n, 0.25);
    for (std::size_t j = 0; j < singles; ++j) layers[2 * j + 1] = {single(j)};
    for (std::size_t j = 0; j + 1 < singles; ++j) {
      const auto inter = sphere_sphere_intersection_circle(single(j), delta2[2 * j + 1].to_double(), single(j + 1),
                                                           delta2[2 * j + 2].to_double());
      if (inter.kind != SphereIntersection::Kind::circle) {
        throw ConstructionError("consecutive spheres do not meet in a circle");
      }
      layers[2 * j + 2] = sample_circle_3d(inter.circle, n, 0.25 + 0.5 * static_cast<double>(j % 2));
    }
    const double last = pos[singles - 1];
    layers[k] = sample_circle_3d(Circle3{{last + r[k - 1] * std::cos(cap), 0.0, 0.0}, {1.0, 0.0, 0.0},
                                         std::pow(r[k - 1] * std::sin(cap), 2)},
                                 n, 0.25);
    if (!all_layers_separated(layers, sep2)) continue;
    for (auto& layer : layers) renumber(layer);
    return LayeredConfig(std::move(layers), DistanceSpec{delta2, ComparisonMode::tolerant()}, 3);
  }
  throw ConstructionError("could not place disjoint layers");
}

bool PeelResult::meets_threshold() const {
  // min_degree >= E0/(2N)  <=>  2N min_degree >= E0
  return 2 * static_cast<std::uint64_t>(original_size) * min_degree >= initial_edges;
}

PeelResult peel_min_degree(const PointSet& points, const Rational& d2, const ComparisonMode& mode) {
  const NeighborLists adj = neighbor_lists(points, points, DistanceMatcher(d2, mode));
  PeelResult out;
  out.original_size = points.size();
  std::vector<std::size_t> degree(points.size());
  std::uint64_t twice = 0;
  for (std::size_t i = 0; i < adj.size(); ++i) {
    degree[i] = adj[i].size();
    twice += degree[i];
  }
  out.initial_edges = twice / 2;
  if (out.initial_edges == 0) throw ConstructionError("distance graph has no edges");

  const std::uint64_t two_n = 2 * static_cast<std::uint64_t>(points.size());
  auto below = [&](std::size_t deg) { return two_n * deg < out.initial_edges; };
  std::vector<char> removed(points.size(), 0);
  std::vector<std::size_t> queue;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (below(degree[i])) {
      removed[i] = 1;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    const std::size_t v = queue.back();
    queue.pop_back();
    for (auto u : adj[v]) {
      if (removed[u]) continue;
      --degree[u];
      if (below(degree[u])) {
        removed[u] = 1;
        queue.push_back(u);
      }
    }
  }
  std::uint64_t core_twice = 0;
  out.min_degree = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (removed[i]) continue;
    out.core.push_back(points[i]);
    out.min_degree = std::min(out.min_degree, degree[i]);
    core_twice += degree[i];
  }
  if (out.core.empty()) throw ConstructionError("peeling removed every point");
  out.core_edges = core_twice / 2;
  return out;
}

OddRegularResult gen_3d_odd_regular(std::size_t k, std::size_t n) {
  if (k < 3 || k % 2 == 0) throw std::invalid_argument("k must be odd and >= 3");
  if (n < 2) throw std::invalid_argument("n must be >= 2");
  std::size_t side = 1;
  while (side * side * side < n) ++side;
  PointSet grid;
  grid.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid.push_back(Point::exact({Rational(static_cast<long>(i % side)), Rational(static_cast<long>((i / side) % side)),
                                 Rational(static_cast<long>(i / (side * side)))},
                                static_cast<std::int64_t>(i)));
  }
  const Rational d2 = popular_distance(grid).first;
  PeelResult peel = peel_min_degree(grid, d2, ComparisonMode::exact());
  PointSet core = peel.core;
  renumber(core);
  std::optional<BigInt> floor;
  if (peel.min_degree > k) floor = BigInt(static_cast<unsigned long>(core.size())) * pow_size(peel.min_degree - k, k);
  std::vector<PointSet> layers(k + 1, core);
  LayeredConfig config(std::move(layers), DistanceSpec{std::vector<Rational>(k, d2), ComparisonMode::exact()}, 3);
  return {std::move(config), std::move(peel), d2, floor};
}

SpherePair circle_bouquet_supplier(std::size_t n) {
  const BigInt root_n = sqrt(BigInt(static_cast<unsigned long>(n)));
  const std::size_t count = std::max<std::size_t>(1, root_n.get_ui());
  const Point origin = Point::floating({0.0, 0.0, 0.0});
  SpherePair out;
  for (std::size_t j = 0; j < count; ++j) {
    const double alpha = 0.35 * static_cast<double>(j + 1) / static_cast<double>(count);
    const double beta = kGoldenAngle * static_cast<double>(j);
    const Point y = Point::floating({1.2 * std::cos(alpha), 1.2 * std::sin(alpha) * std::cos(beta),
                                     1.2 * std::sin(alpha) * std::sin(beta)},
                                    static_cast<std::int64_t>(j));
    const auto inter = sphere_sphere_intersection_circle(origin, 1.0, y, 1.0);
    PointSet ring = sample_circle_3d(inter.circle, count, static_cast<double>(j) / static_cast<double>(count + 1));
    out.sphere_points.insert(out.sphere_points.end(), ring.begin(), ring.end());
    out.free_points.push_back(y);
  }
  out.sphere_points = dedupe(out.sphere_points);
  return out;
}

OddSphereResult gen_3d_odd_sphere(std::size_t k, std::size_t n, const SphereSupplier& supplier) {
  if (k < 3 || k % 2 == 0) throw std::invalid_argument("k must be odd and >= 3");
  const LayeredConfig base = gen_3d_even(k - 1, std::vector<Rational>(k - 1, Rational(1)), n);
  const Point& center = base.layer(k - 2).front();
  SpherePair pair = supplier(n);
  const double eps = ComparisonMode::kDefaultEps;
  for (const auto& p : pair.sphere_points) {
    if (p.dim() != 3) throw DimensionMismatch("supplier points must be in R^3");
    const auto& c = p.float_coords();
    if (std::abs(c[0] * c[0] + c[1] * c[1] + c[2] * c[2] - 1.0) > eps) {
      throw ConstructionError("supplier point is off the unit sphere");
    }
  }
  for (const auto& p : pair.free_points) {
    if (p.dim() != 3) throw DimensionMismatch("supplier points must be in R^3");
  }
  std::vector<PointSet> layers;
  for (std::size_t i = 0; i + 1 < k; ++i) layers.push_back(base.layer(i));
  layers.push_back(dedupe(translate(to_floating(pair.sphere_points), center.float_coords())));
  layers.push_back(dedupe(translate(to_floating(pair.free_points), center.float_coords())));

  std::set<Point, PointIdentityLess> seen;
  std::size_t total = 0;
  for (const auto& layer : layers) {
    seen.insert(layer.begin(), layer.end());
    total += layer.size();
  }
  if (seen.size() != total) throw ConstructionError("supplier points collide with the chain layers");

  const ComparisonMode tol = ComparisonMode::tolerant();
  const std::uint64_t incidences = count_incidences(layers[k - 1], layers[k], Rational(1), tol);
  LayeredConfig config(std::move(layers), DistanceSpec{std::vector<Rational>(k, Rational(1)), tol}, 3);
  BigInt floor = pow_size(n, (k - 1) / 2) * BigInt(static_cast<unsigned long>(incidences));
  return {std::move(config), incidences, std::move(floor)};
}

LayeredConfig gen_orthogonal_circles(std::size_t d, std::size_t k, std::size_t n) {
  if (d < 4) throw std::invalid_argument("orthogonal circles need d >= 4");
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("n must be even and >= 2");
  const std::size_t h = n / 2;
  const std::array<Rational, 2> seed{Rational(1, 2), Rational(1, 2)};
  const PointSet arc = rational_circle_points(origin2_exact(), Rational(1, 2), h, Rational(0), Rational(1, 4), seed);
  PointSet layer;
  layer.reserve(n);
  for (int circle = 0; circle < 2; ++circle) {
    for (const auto& p : arc) {
      std::vector<Rational> c(d, Rational(0));
      c[2 * circle] = p.rational_coords()[0];
      c[2 * circle + 1] = p.rational_coords()[1];
      layer.push_back(Point::exact(std::move(c)));
    }
  }
  renumber(layer);
  std::vector<PointSet> layers(k + 1, layer);
  return LayeredConfig(std::move(layers), DistanceSpec{std::vector<Rational>(k, Rational(1)), ComparisonMode::exact()},
                       d);
}

BigInt orthogonal_circles_count(std::size_t k, std::size_t n) {
  const std::size_t h = n / 2;
  auto falling = [](std::size_t top, std::size_t len) {
    BigInt out(1);
    for (std::size_t i = 0; i < len; ++i) {
      if (i >= top) return BigInt(0);
      out *= static_cast<unsigned long>(top - i);
    }
    return out;
  };
  return BigInt(2) * falling(h, (k + 2) / 2) * falling(h, (k + 1) / 2);
}

TreeConstruction gen_star(std::size_t l, std::size_t n, std::optional<std::vector<Rational>> radii2) {
  if (l < 1) throw std::invalid_argument("l must be >= 1");
  if (n < l || n % l != 0) throw std::invalid_argument("n must be a positive multiple of l");
  std::vector<Rational> r2;
  if (radii2) {
    r2 = *radii2;
    if (r2.size() != l) throw std::invalid_argument("need one squared radius per leaf");
  } else {
    for (std::size_t j = 1; j <= l; ++j) r2.emplace_back(static_cast<long>(j * j));
  }
  std::set<Rational> distinct(r2.begin(), r2.end());
  if (distinct.size() != r2.size()) throw std::invalid_argument("radii must be distinct");

  const std::size_t m = n / l;
  TreeConstruction out;
  out.layers.push_back({origin2_exact()});
  out.tree.vertex_count = l + 1;
  for (std::size_t j = 0; j < l; ++j) {
    if (r2[j].sign() <= 0) throw std::invalid_argument("radii must be positive");
    out.layers.push_back(rational_circle_points(origin2_exact(), r2[j], m, Rational(0), Rational(1, 2)));
    out.tree.edges.push_back(TreeEdge{0, j + 1, r2[j]});
  }
  out.mode = ComparisonMode::exact();
  out.floor = pow_size(m, l);
  out.exact_count = true;
  return out;
}

LabeledTree spider_tree(std::size_t l, const std::array<Rational, 3>& arm_d2) {
  if (l < 1) throw std::invalid_argument("l must be >= 1");
  LabeledTree tree;
  tree.vertex_count = 3 * l + 1;
  for (std::size_t j = 0; j < l; ++j) {
    const std::size_t a = 3 * j + 1;
    tree.edges.push_back(TreeEdge{0, a, arm_d2[0]});
    tree.edges.push_back(TreeEdge{a, a + 1, arm_d2[1]});
    tree.edges.push_back(TreeEdge{a + 1, a + 2, arm_d2[2]});
  }
  tree.validate();
  return tree;
}

namespace {

TreeConstruction joints_fixed(std::size_t l, std::size_t n) {
  const Rational one(1);
  const double e = 1.0 / 3.0;
  const ComparisonMode tol = ComparisonMode::tolerant();
  TreeConstruction out;
  out.tree = spider_tree(l, {one, one, one});
  out.mode = tol;
  const PointSet center = small_segment(n, 0.9 * e, false);
  const Point& y = center.front();
  for (int turn = 0; turn < 32; ++turn) {
    const double offset = kGoldenAngle * turn;
    std::vector<PointSet> layers(3 * l + 1);
    layers[0] = center;
    bool ok = true;
    for (std::size_t j = 0; j < l && ok; ++j) {
      const double phi = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(l) + offset;
      const double dist = 2.0 - 2.0 * e;
      const Point b = Point::floating({y.float_coords()[0] + dist * std::cos(phi), y.float_coords()[1] + dist * std::sin(phi)});
      PointSet matched;
      for (const auto& z : center) {
        PointSet hits = circle_circle_intersection(z, 1.0, b, 1.0);
        if (hits.empty()) {
          ok = false;
          break;
        }
        matched.push_back(hits.front());
      }
      layers[3 * j + 1] = dedupe(matched);
      layers[3 * j + 2] = {b};
      layers[3 * j + 3] = float_arc(b, 1.0, phi, n, 0.3);
    }
    if (!ok || !all_layers_separated(layers, 1e-12)) continue;
    if (!tree_certifies(layers, out.tree, tol)) continue;
    out.layers = std::move(layers);
    out.floor = pow_size(n, l + 1);
    return out;
  }
  throw ConstructionError("could not place the arms");
}

TreeConstruction center_fixed(std::size_t l, std::size_t n, double eps, std::uint64_t seed) {
  const UnitRichGrid grid = gen_unit_rich_grid(n);
  const SplitResult split = split_and_translate(grid.points, grid.points, grid.popular_d2, eps, seed);
  const PointSet leaves = to_floating(split.x1);
  const PointSet joints = to_floating(split.x2);

  double extent2 = 0.0;
  for (const auto* a : {&leaves, &joints}) {
    for (const auto* b : {&leaves, &joints}) {
      for (const auto& p : *a) {
        for (const auto& q : *b) extent2 = std::max(extent2, squared_distance_float(p, q));
      }
    }
  }
  const long side = static_cast<long>(std::ceil(3.0 * std::sqrt(extent2))) + 1;
  const Rational big(side * side);
  const double radius = static_cast<double>(side);
  const double e = radius / 3.0;
  const ComparisonMode tol = ComparisonMode::tolerant();

  TreeConstruction out;
  out.tree = spider_tree(l, {big, big, grid.popular_d2});
  out.mode = tol;
  const Point x = Point::floating({0.0, 0.0});
  const auto& y = joints.front().float_coords();
  for (int turn = 0; turn < 32; ++turn) {
    const double offset = kGoldenAngle * turn;
    std::vector<PointSet> layers(3 * l + 1);
    layers[0] = {x};
    bool ok = true;
    for (std::size_t j = 0; j < l && ok; ++j) {
      const double phi = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(l) + offset;
      const double dist = 2.0 * radius - 2.0 * e;
      const std::vector<double> shift{dist * std::cos(phi) - y[0], dist * std::sin(phi) - y[1]};
      PointSet arm_joints = translate(joints, shift);
      PointSet matched;
      for (const auto& z : arm_joints) {
        PointSet hits = circle_circle_intersection(z, big.to_double(), x, big.to_double());
        if (hits.empty()) {
          ok = false;
          break;
        }
        matched.push_back(hits.front());
      }
      layers[3 * j + 1] = dedupe(matched);
      layers[3 * j + 2] = std::move(arm_joints);
      layers[3 * j + 3] = translate(leaves, shift);
    }
    if (!ok) continue;
    // Arms must not share points; within an arm joints and leaves may coincide.
    bool disjoint = true;
    std::set<Point, PointIdentityLess> seen{x};
    for (std::size_t j = 0; j < l && disjoint; ++j) {
      std::set<Point, PointIdentityLess> arm;
      for (std::size_t v = 1; v <= 3; ++v) arm.insert(layers[3 * j + v].begin(), layers[3 * j + v].end());
      for (const auto& p : arm) {
        for (const auto& q : seen) {
          if (squared_distance_float(p, q) <= 1e-12) {
            disjoint = false;
            break;
          }
        }
        if (!disjoint) break;
      }
      seen.insert(arm.begin(), arm.end());
    }
    if (!disjoint || !tree_certifies(layers, out.tree, tol)) continue;
    out.layers = std::move(layers);
    out.floor = pow_size(split.preserved_incidences, l);
    return out;
  }
  throw ConstructionError("could not place the arms");
}

}  // namespace

TreeConstruction gen_T_l3(std::size_t l, std::size_t n, TreeVariant variant, double eps, std::uint64_t seed) {
  if (l < 1) throw std::invalid_argument("l must be >= 1");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  return variant == TreeVariant::joints_fixed ? joints_fixed(l, n) : center_fixed(l, n, eps, seed);
}

PointSet stereographic(const PointSet& planar) {
  PointSet out;
  out.reserve(planar.size());
  for (const auto& p : planar) {
    if (p.dim() != 2) throw DimensionMismatch("stereographic projection takes planar points");
    const double x = p.float_coords()[0], y = p.float_coords()[1];
    const double s = 1.0 + x * x + y * y;
    out.push_back(Point::floating({2.0 * x / s, 2.0 * y / s, (x * x + y * y - 1.0) / s}, p.id()));
  }
  return out;
}

PointSet inverse_stereographic(const PointSet& sphere) {
  PointSet out;
  out.reserve(sphere.size());
  for (const auto& p : sphere) {
    if (p.dim() != 3) throw DimensionMismatch("inverse projection takes points of R^3");
    const auto& c = p.float_coords();
    const double w = 1.0 - c[2];
    if (w == 0.0) throw std::invalid_argument("the projection pole has no planar image");
    out.push_back(Point::floating({c[0] / w, c[1] / w}, p.id()));
  }
  return out;
}

}  // namespace chain_census
