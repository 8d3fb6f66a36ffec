#include "chain_census/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "chain_census/io.hpp"
#include "chain_census/richness.hpp"

namespace chain_census {
namespace {

std::vector<Rational> ones(std::size_t k) { return std::vector<Rational>(k, Rational(1)); }

BigInt ceil_of(const Rational& r) { return r.ceil(); }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

BigInt count_of(const Generated& g, unsigned threads) {
  CountOptions options;
  options.threads = threads;
  if (g.tree) {
    return count_tree_embeddings(std::span<const PointSet>(g.tree->layers), g.tree->tree, g.tree->mode, options);
  }
  return count_chains(*g.config, options);
}

// Calls visit with the layer indices of every chain.
void for_each_chain(const LayeredConfig& config, const BipartiteAdjacency& adj,
                    const std::function<void(const std::vector<std::uint32_t>&)>& visit) {
  std::vector<PointSet> layers;
  for (std::size_t i = 0; i < config.layer_count(); ++i) layers.push_back(config.layer(i));
  const IdentityIndex ident = identity_index(layers);
  std::vector<std::uint32_t> tuple(config.layer_count());
  std::function<void(std::size_t)> walk = [&](std::size_t depth) {
    if (depth == tuple.size()) {
      visit(tuple);
      return;
    }
    auto distinct = [&](std::uint32_t p) {
      for (std::size_t j = 0; j < depth; ++j) {
        if (ident.ids[j][tuple[j]] == ident.ids[depth][p]) return false;
      }
      return true;
    };
    if (depth == 0) {
      for (std::uint32_t p = 0; p < layers[0].size(); ++p) {
        tuple[0] = p;
        walk(1);
      }
      return;
    }
    for (auto p : adj.lists[depth - 1][tuple[depth - 1]]) {
      if (!distinct(p)) continue;
      tuple[depth] = p;
      walk(depth + 1);
    }
  };
  walk(0);
}

}  // namespace

const std::vector<std::string>& construction_ids() {
  static const std::vector<std::string> ids{"planar",        "k1mod3",    "split",      "3d-even",
                                            "3d-odd-regular", "3d-odd-sphere", "orthogonal", "star",
                                            "tl3-center",    "tl3-joints"};
  return ids;
}

bool is_tree_construction(const std::string& id) { return id == "star" || id == "tl3-center" || id == "tl3-joints"; }

Generated generate(const GenerateParams& p) {
  Generated g;
  g.construction = p.construction;
  const std::string& id = p.construction;
  if (id == "planar") {
    const auto d2 = p.delta2 ? *p.delta2 : ones(p.k);
    g.config = gen_planar_chain(p.k, d2, p.n, p.eps.value_or(0.1), p.mode);
    g.certificate = p.k <= 2 ? Certificate::closed_form : Certificate::floor;
    g.expected = planar_chain_floor(p.k, p.n);
  } else if (id == "k1mod3") {
    auto r = gen_planar_k1mod3(p.k, p.n, p.eps.value_or(1.0), p.seed);
    g.note = "popular d2 " + r.popular_d2.str() + ", preserved incidences " +
             std::to_string(r.split.preserved_incidences);
    g.config = std::move(r.config);
    g.split = std::move(r.split);
    g.certificate = Certificate::floor;
    g.expected = r.floor;
  } else if (id == "split") {
    const UnitRichGrid grid = gen_unit_rich_grid(p.n);
    SplitResult s = split_and_translate(grid.points, grid.points, grid.popular_d2, p.eps.value_or(1.0), p.seed);
    g.config.emplace(std::vector<PointSet>{s.x1, s.x2}, DistanceSpec{{grid.popular_d2}, ComparisonMode::exact()}, 2);
    g.certificate = Certificate::floor;
    g.expected = ceil_of(s.floor());
    g.note = "E " + std::to_string(s.original_incidences) + ", uncut " + std::to_string(s.uncut_incidences) +
             ", preserved " + std::to_string(s.preserved_incidences) + ", normalized diameter " +
             fixed(s.normalized_diameter, 6);
    g.split = std::move(s);
  } else if (id == "3d-even") {
    const auto d2 = p.delta2 ? *p.delta2 : ones(p.k);
    g.config = gen_3d_even(p.k, d2, p.n);
    g.certificate = Certificate::closed_form;
    g.expected = big_pow(BigInt(static_cast<unsigned long>(p.n)), p.k / 2 + 1);
  } else if (id == "3d-odd-regular") {
    auto r = gen_3d_odd_regular(p.k, p.n);
    g.note = "popular d2 " + r.popular_d2.str() + ", core " + std::to_string(r.peel.core.size()) + ", min degree " +
             std::to_string(r.peel.min_degree);
    g.config = std::move(r.config);
    if (r.floor) {
      g.certificate = Certificate::floor;
      g.expected = *r.floor;
    } else {
      g.note += " (floor vacuous: min degree <= k)";
    }
  } else if (id == "3d-odd-sphere") {
    auto r = gen_3d_odd_sphere(p.k, p.n);
    g.note = "sphere incidences " + std::to_string(r.incidences);
    g.config = std::move(r.config);
    g.certificate = Certificate::floor;
    g.expected = r.floor;
  } else if (id == "orthogonal") {
    g.config = gen_orthogonal_circles(p.dim, p.k, p.n);
    g.certificate = Certificate::closed_form;
    g.expected = orthogonal_circles_count(p.k, p.n);
  } else if (id == "star") {
    g.tree = gen_star(p.l, p.n);
    g.certificate = Certificate::closed_form;
    g.expected = g.tree->floor;
  } else if (id == "tl3-center" || id == "tl3-joints") {
    const auto variant = id == "tl3-center" ? TreeVariant::center_fixed : TreeVariant::joints_fixed;
    g.tree = gen_T_l3(p.l, p.n, variant, p.eps.value_or(1.0), p.seed);
    g.certificate = Certificate::floor;
    g.expected = g.tree->floor;
  } else {
    throw std::invalid_argument("unknown construction '" + id + "'");
  }
  return g;
}

std::optional<Rational> theory_exponent(const std::string& c, std::size_t k) {
  const long kl = static_cast<long>(k);
  if (c == "planar") return Rational((kl + 1) / 3 + 1);
  if (c == "k1mod3") return Rational(kl - 1, 3) + Rational(1);
  if (c == "split") return Rational(1);
  if (c == "3d-even") return Rational(kl / 2 + 1);
  if (c == "3d-odd-regular") return Rational(BigInt(kl + 3), BigInt(3));
  if (c == "3d-odd-sphere") return Rational(BigInt(kl + 1), BigInt(2));
  if (c == "orthogonal") return Rational(kl + 1);
  return std::nullopt;
}

FitResult fit_exponent(const std::vector<double>& n, const std::vector<BigInt>& counts) {
  if (n.size() != counts.size()) throw std::invalid_argument("n and counts differ in length");
  FitResult out;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (counts[i] <= 0 || !(n[i] > 0.0)) {
      out.excluded.push_back(i);
      continue;
    }
    xs.push_back(std::log(n[i]));
    ys.push_back(log_big(counts[i]));
  }
  if (xs.size() < 3) {
    out.notice = "fit skipped: " + std::to_string(xs.size()) + " usable rows, need at least 3";
    return out;
  }
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) {
    out.notice = "fit skipped: all n equal";
    return out;
  }
  out.ok = true;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  if (!out.excluded.empty()) out.notice = std::to_string(out.excluded.size()) + " rows with zero counts excluded";
  return out;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  if (is_tree_construction(spec.construction)) {
    throw std::invalid_argument("experiments measure chain constructions, not '" + spec.construction + "'");
  }
  ExperimentReport report;
  report.spec = spec;
  std::vector<std::size_t> ns = spec.ns;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  report.spec.ns = ns;
  report.theory = theory_exponent(spec.construction, spec.k);

  for (std::size_t n : ns) {
    ExperimentRow row;
    row.construction = spec.construction;
    row.k = spec.k;
    row.n = n;
    const auto start = std::chrono::steady_clock::now();
    try {
      GenerateParams params;
      params.construction = spec.construction;
      params.k = spec.k;
      params.n = n;
      params.seed = spec.seed;
      params.eps = spec.eps;
      const Generated g = generate(params);
      const BipartiteAdjacency adj = build_adjacency(*g.config);
      row.walks = count_walks(*g.config, adj, spec.threads);
      row.chains = count_chains(*g.config, adj, spec.threads);
      row.incidences = adj.total_edges();
      if (g.certificate == Certificate::closed_form) row.meets_certificate = row.chains == g.expected;
      if (g.certificate == Certificate::floor) row.meets_certificate = row.chains >= g.expected;
    } catch (const std::exception& e) {
      row.error = e.what();
      row.meets_certificate = false;
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.rows.push_back(std::move(row));
  }

  std::vector<double> xs;
  std::vector<BigInt> ys;
  for (const auto& row : report.rows) {
    if (!row.error.empty()) continue;
    xs.push_back(static_cast<double>(row.n));
    ys.push_back(row.chains);
  }
  report.fit = fit_exponent(xs, ys);

  std::ostringstream verdict;
  bool rows_ok = true;
  for (const auto& row : report.rows) rows_ok = rows_ok && row.meets_certificate;
  if (!report.fit.ok) {
    verdict << "FAIL " << report.fit.notice;
  } else if (!report.theory) {
    verdict << "FAIL no theory exponent for " << spec.construction;
  } else {
    const double gap = std::abs(report.fit.slope - report.theory->to_double());
    report.pass = gap <= spec.tolerance && rows_ok;
    verdict << (report.pass ? "PASS" : "FAIL") << " slope " << fixed(report.fit.slope, 4) << " theory "
            << report.theory->str() << " |gap| " << fixed(gap, 4) << " tolerance " << fixed(spec.tolerance, 4)
            << " r2 " << fixed(report.fit.r2, 6);
    if (!rows_ok) verdict << " (a row misses its certificate)";
  }
  report.verdict = verdict.str();
  return report;
}

void write_csv(std::ostream& out, const ExperimentReport& report) {
  out << "construction,k,n,chains,walks,incidences,seconds\n";
  for (const auto& row : report.rows) {
    out << row.construction << ',' << row.k << ',' << row.n << ',';
    if (row.error.empty()) {
      out << to_string(row.chains) << ',' << to_string(row.walks) << ',' << row.incidences << ',';
    } else {
      out << "error,error,error,";
    }
    out << (report.spec.timings ? fixed(row.seconds, 6) : std::string("na")) << '\n';
  }
}

std::string experiment_csv(const ExperimentReport& report) {
  std::ostringstream out;
  write_csv(out, report);
  return out.str();
}

std::string render_svg(const ExperimentReport& report) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : report.rows) {
    if (row.error.empty() && row.chains > 0) pts.emplace_back(std::log(static_cast<double>(row.n)), log_big(row.chains));
  }
  const double width = 480, height = 360, margin = 48;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (pts.empty()) {
    svg << "<text x=\"20\" y=\"40\">no data</text>\n</svg>\n";
    return svg.str();
  }
  double x0 = pts.front().first, x1 = x0, y0 = pts.front().second, y1 = y0;
  for (const auto& [x, y] : pts) {
    x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
  }
  if (x1 - x0 < 1e-9) x1 = x0 + 1;
  if (y1 - y0 < 1e-9) y1 = y0 + 1;
  auto sx = [&](double x) { return margin + (x - x0) / (x1 - x0) * (width - 2 * margin); };
  auto sy = [&](double y) { return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin); };
  svg << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
      << height - margin << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
      << "\" stroke=\"black\"/>\n";
  for (const auto& [x, y] : pts) {
    svg << "<circle cx=\"" << fixed(sx(x), 2) << "\" cy=\"" << fixed(sy(y), 2) << "\" r=\"4\" fill=\"steelblue\"/>\n";
  }
  if (report.fit.ok) {
    const double fy0 = report.fit.intercept + report.fit.slope * x0;
    const double fy1 = report.fit.intercept + report.fit.slope * x1;
    svg << "<line x1=\"" << fixed(sx(x0), 2) << "\" y1=\"" << fixed(sy(fy0), 2) << "\" x2=\"" << fixed(sx(x1), 2)
        << "\" y2=\"" << fixed(sy(fy1), 2) << "\" stroke=\"firebrick\"/>\n";
    svg << "<text x=\"" << margin << "\" y=\"24\" font-size=\"14\">" << report.spec.construction
        << " k=" << report.spec.k << " slope " << fixed(report.fit.slope, 3) << "</text>\n";
  }
  svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 12 << "\" font-size=\"12\">ln n</text>\n";
  svg << "<text x=\"8\" y=\"" << height / 2 << "\" font-size=\"12\">ln chains</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

Claim parse_claim(const std::string& text) {
  if (text == "closed-form") return Claim::closed_form;
  if (text == "floor") return Claim::floor;
  if (text == "covering") return Claim::covering;
  if (text == "richness") return Claim::richness;
  throw std::invalid_argument("claim must be closed-form, floor, covering or richness");
}

std::string claim_name(Claim claim) {
  switch (claim) {
    case Claim::closed_form:
      return "closed-form";
    case Claim::floor:
      return "floor";
    case Claim::covering:
      return "covering";
    case Claim::richness:
      return "richness";
  }
  return "";
}

VerifyReport verify(const Generated& g, Claim claim, unsigned threads) {
  if (claim == Claim::covering || claim == Claim::richness) {
    if (!g.config) throw InapplicableClaim(claim_name(claim) + " needs a layered configuration");
    return verify(*g.config, claim);
  }
  VerifyReport out;
  out.claim = claim_name(claim);
  if (g.certificate == Certificate::none) throw InapplicableClaim(g.construction + " carries no certificate here");
  if (claim == Claim::closed_form && g.certificate != Certificate::closed_form) {
    throw InapplicableClaim(g.construction + " has a floor, not a closed form");
  }
  const BigInt count = count_of(g, threads);
  out.computed = to_string(count);
  if (claim == Claim::closed_form) {
    out.expected = to_string(g.expected);
    out.pass = count == g.expected;
    out.detail = out.computed + (out.pass ? " = " : " != ") + out.expected;
  } else {
    out.expected = ">= " + to_string(g.expected);
    out.pass = count >= g.expected;
    out.detail = out.computed + (out.pass ? " >= " : " < ") + to_string(g.expected);
    if (g.split) {
      const SplitResult& s = *g.split;
      const double eps = 22.0 / static_cast<double>(s.cells_per_side);
      const bool floor_ok = s.meets_floor();
      out.pass = out.pass && floor_ok;
      out.detail += "; preserved " + std::to_string(s.preserved_incidences) + " vs E/(2*" +
                    std::to_string(s.cells_per_side) + "^2) = " + s.floor().str() + (floor_ok ? " ok" : " FAIL") +
                    "; normalized diameter " + fixed(s.normalized_diameter, 6) + " (cells sized for eps >= " +
                    fixed(eps, 4) + ")";
    }
  }
  if (!g.note.empty()) out.detail += "; " + g.note;
  return out;
}

VerifyReport verify(const LayeredConfig& config, Claim claim, const Rational& eps) {
  VerifyReport out;
  out.claim = claim_name(claim);
  if (claim == Claim::richness) {
    out.pass = true;
    double tight = 0.0;
    std::size_t rows = 0;
    for (std::size_t i = 0; i + 1 < config.layer_count(); ++i) {
      const auto r = check_richness_bound(config.layer(i), config.layer(i + 1), config.spec().delta2[i], config.mode());
      out.pass = out.pass && r.holds;
      tight = std::max(tight, r.tightest_ratio);
      rows += r.rows.size();
    }
    out.computed = std::to_string(rows) + " richness values checked";
    out.expected = "r |rich| <= incidences(P, rich) <= incidences(P, Q)";
    out.detail = "tightest ratio " + fixed(tight, 6);
    return out;
  }
  if (claim == Claim::covering) {
    const BipartiteAdjacency adj = build_adjacency(config);
    const BigInt chains = count_chains(config, adj);
    if (chains > 5000000) throw InapplicableClaim("too many chains for an exhaustive covering check");
    const Covering cover = stable_covering(config, eps);
    std::uint64_t missing = 0, seen = 0;
    for_each_chain(config, adj, [&](const std::vector<std::uint32_t>& t) {
      ++seen;
      const bool hit = std::any_of(cover.sequences.begin(), cover.sequences.end(),
                                   [&](const DecompositionSequence& s) { return s.contains(t); });
      if (!hit) ++missing;
    });
    const bool bounded = cover.lengths_bounded(config.k());
    std::size_t longest = 0;
    for (const auto& s : cover.sequences) longest = std::max(longest, s.length());
    out.pass = missing == 0 && bounded;
    out.computed = std::to_string(seen - missing) + " of " + std::to_string(seen) + " chains covered by " +
                   std::to_string(cover.sequences.size()) + " sequences, longest " + std::to_string(longest);
    out.expected = "all chains covered, length <= (k+1)/eps + 1";
    out.detail = "eps " + eps.str() + ", n_ref " + std::to_string(cover.n_ref);
    return out;
  }
  throw InapplicableClaim(claim_name(claim) + " needs a generated construction");
}

}  // namespace chain_census
