// Command-line front end: generate constructions, count chains and trees,
// measure exponents and check certificates. Reports and data go to stdout
// or --out; diagnostics go to stderr.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "chain_census/experiment.hpp"
#include "chain_census/io.hpp"
#include "chain_census/layered.hpp"
#include "chain_census/richness.hpp"

namespace cc = chain_census;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  std::string eps;
  std::string mode;
  std::string out;
  unsigned threads = 1;

  std::optional<cc::ComparisonMode> parsed_mode() const {
    if (mode.empty()) return std::nullopt;
    return cc::ComparisonMode::parse(mode);
  }
  std::optional<double> eps_double() const {
    if (eps.empty()) return std::nullopt;
    return cc::parse_number(eps).to_double();
  }
};

void log(const std::string& msg) { std::cerr << "chain_census: " << msg << '\n'; }

// Writes to --out when given, stdout otherwise.
void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw cc::FormatError("cannot write " + g.out);
  f << text;
  log("wrote " + g.out);
}

std::vector<cc::Rational> parse_list(const std::vector<std::string>& items) {
  std::vector<cc::Rational> out;
  for (const auto& s : items) out.push_back(cc::parse_number(s));
  return out;
}

cc::PointSet convert(const cc::PointSet& points, const cc::ComparisonMode& mode) {
  if (!mode.is_exact()) {
    cc::PointSet out;
    for (const auto& p : points) out.push_back(p.is_exact() ? p.to_floating() : p);
    return out;
  }
  for (const auto& p : points) {
    if (!p.is_exact()) throw cc::InvalidConfig("exact mode needs exact coordinates");
  }
  return points;
}

// --mode overrides the manifest; exact points are rounded for tolerant mode.
cc::LayeredConfig apply_mode(const cc::LayeredConfig& config, const std::optional<cc::ComparisonMode>& mode) {
  if (!mode || *mode == config.mode()) return config;
  std::vector<cc::PointSet> layers;
  for (std::size_t i = 0; i < config.layer_count(); ++i) layers.push_back(convert(config.layer(i), *mode));
  return cc::LayeredConfig(std::move(layers), cc::DistanceSpec{config.spec().delta2, *mode}, config.dim());
}

cc::ComparisonMode mode_for(const Globals& g, const cc::PointSet& a, const cc::PointSet& b) {
  if (auto m = g.parsed_mode()) return *m;
  for (const auto* s : {&a, &b})
    for (const auto& p : *s)
      if (!p.is_exact()) return cc::ComparisonMode::tolerant();
  return cc::ComparisonMode::exact();
}

std::string certificate_name(cc::Certificate c) {
  switch (c) {
    case cc::Certificate::closed_form: return "closed-form";
    case cc::Certificate::floor: return "floor";
    case cc::Certificate::none: break;
  }
  return "none";
}

struct GenerateArgs {
  std::string construction;
  std::size_t k = 2;
  std::size_t n = 16;
  std::vector<std::string> delta2;
  std::size_t dim = 4;
  std::size_t l = 3;
};

void add_generate_options(CLI::App* sub, GenerateArgs& a, bool required) {
  auto* c = sub->add_option("--construction,-c", a.construction, "construction id");
  if (required) c->required();
  sub->add_option("--k,-k", a.k, "chain length (edges)");
  sub->add_option("--n,-n", a.n, "points per free layer");
  sub->add_option("--delta2", a.delta2, "squared distances (planar, 3d-even)")->delimiter(',');
  sub->add_option("--dim", a.dim, "ambient dimension (orthogonal)");
  sub->add_option("--l", a.l, "arms or leaves (trees)");
}

cc::GenerateParams to_params(const GenerateArgs& a, const Globals& g) {
  cc::GenerateParams p;
  p.construction = a.construction;
  p.k = a.k;
  p.n = a.n;
  p.seed = g.seed;
  p.eps = g.eps_double();
  if (!a.delta2.empty()) p.delta2 = parse_list(a.delta2);
  p.mode = g.parsed_mode();
  p.dim = a.dim;
  p.l = a.l;
  return p;
}

int run_generate(const GenerateArgs& a, const Globals& g) {
  if (g.out.empty()) throw CLI::ValidationError("generate needs --out <manifest path>");
  const auto gen = cc::generate(to_params(a, g));
  std::ostringstream report;
  report << "construction " << gen.construction << "\n";
  if (gen.config) {
    cc::write_manifest(g.out, *gen.config);
    report << "layers " << gen.config->layer_count() << "\nmode " << gen.config->mode().str() << "\n";
  } else {
    const auto& t = *gen.tree;
    const std::size_t dim = t.layers.empty() || t.layers[0].empty() ? 2 : t.layers[0][0].dim();
    cc::write_tree_manifest(g.out, cc::TreeInput{t.layers, t.tree, t.mode, dim});
    report << "vertices " << t.tree.vertex_count << "\nmode " << t.mode.str() << "\n";
  }
  report << "certificate " << certificate_name(gen.certificate) << "\n";
  if (gen.certificate != cc::Certificate::none) report << "expected " << cc::to_string(gen.expected) << "\n";
  if (!gen.note.empty()) report << "note " << gen.note << "\n";
  std::cout << report.str();
  log("wrote " + g.out);
  return 0;
}

int run_count(const std::string& manifest, const Globals& g) {
  const auto config = apply_mode(cc::read_manifest(manifest), g.parsed_mode());
  const auto adj = cc::build_adjacency(config);
  std::ostringstream s;
  s << "chains " << cc::to_string(cc::count_chains(config, adj, g.threads)) << "\n";
  s << "walks " << cc::to_string(cc::count_walks(config, adj, g.threads)) << "\n";
  s << "incidences " << adj.total_edges() << "\n";
  emit(g, s.str());
  return 0;
}

int run_count_tree(const std::string& manifest, const Globals& g) {
  auto input = cc::read_tree_manifest(manifest);
  if (auto m = g.parsed_mode()) {
    for (auto& layer : input.layers) layer = convert(layer, *m);
    input.mode = *m;
  }
  const auto count =
      cc::count_tree_embeddings(input.layers, input.tree, input.mode, {cc::AdjacencyStrategy::automatic, g.threads});
  emit(g, "embeddings " + cc::to_string(count) + "\n");
  return 0;
}

int run_incidences(const std::string& pfile, const std::string& qfile, const std::string& d2, const Globals& g) {
  const auto P = cc::read_points_file(pfile);
  const auto Q = cc::read_points_file(qfile);
  const auto mode = mode_for(g, P, Q);
  const auto count = cc::count_incidences(convert(P, mode), convert(Q, mode), cc::parse_number(d2), mode);
  emit(g, "incidences " + std::to_string(count) + "\n");
  return 0;
}

int run_rich(const std::string& target_file, const std::string& ref_file, const std::string& d2_text,
             std::optional<std::uint64_t> r, const Globals& g) {
  std::size_t dim = 0;
  const auto target = cc::read_points_file(target_file, &dim);
  const auto ref = cc::read_points_file(ref_file);
  const auto mode = mode_for(g, target, ref);
  const auto T = convert(target, mode), R = convert(ref, mode);
  const auto d2 = cc::parse_number(d2_text);
  if (r) {
    emit(g, cc::points_to_string(cc::rich_points(T, R, d2, *r, mode), dim));
    return 0;
  }
  std::ostringstream s;
  s << "lo,hi,points\n";
  for (const auto& c : cc::dyadic_partition(T, R, d2, mode)) s << c.lo << ',' << c.hi << ',' << c.points.size() << '\n';
  emit(g, s.str());
  return 0;
}

cc::Rational covering_eps(const Globals& g) { return g.eps.empty() ? cc::Rational(1, 2) : cc::parse_number(g.eps); }

int run_decompose(const std::string& manifest, std::size_t max_sequences, const Globals& g) {
  const auto config = apply_mode(cc::read_manifest(manifest), g.parsed_mode());
  const auto cover = cc::stable_covering(config, covering_eps(g), max_sequences);
  std::ostringstream s;
  s << "# eps " << cover.eps.str() << " n_ref " << cover.n_ref << " sequences " << cover.sequences.size()
    << " expanded " << cover.expanded << " lengths_bounded " << (cover.lengths_bounded(config.k()) ? "yes" : "no")
    << "\n";
  s << "sequence,length,gamma,class_sizes\n";
  for (std::size_t i = 0; i < cover.sequences.size(); ++i) {
    const auto& seq = cover.sequences[i];
    s << i << ',' << seq.length() << ',';
    for (std::size_t j = 0; j < seq.gamma.size(); ++j) {
      if (j) s << '|';
      for (std::size_t t = 0; t < seq.gamma[j].size(); ++t) s << (t ? " " : "") << seq.gamma[j][t].str();
    }
    s << ',';
    for (std::size_t j = 0; j < seq.class_sizes.size(); ++j) s << (j ? " " : "") << cc::to_string(seq.class_sizes[j]);
    s << '\n';
  }
  emit(g, s.str());
  return 0;
}

struct ExperimentArgs {
  std::string construction;
  std::size_t k = 2;
  std::vector<std::size_t> ns;
  std::string csv;
  std::string svg;
  bool timings = false;
  double tolerance = 0.2;
};

int run_experiment(const ExperimentArgs& a, const Globals& g) {
  cc::ExperimentSpec spec;
  spec.construction = a.construction;
  spec.k = a.k;
  spec.ns = a.ns;
  spec.seed = g.seed;
  spec.eps = g.eps_double();
  spec.tolerance = a.tolerance;
  spec.threads = g.threads;
  spec.timings = a.timings;
  const auto report = cc::run_experiment(spec);
  for (const auto& row : report.rows)
    if (!row.error.empty()) log("n=" + std::to_string(row.n) + ": " + row.error);
  const std::string csv = cc::experiment_csv(report);
  if (!a.csv.empty()) {
    std::ofstream(a.csv, std::ios::binary) << csv;
    log("wrote " + a.csv);
  } else {
    emit(g, csv);
  }
  if (!a.svg.empty()) {
    std::ofstream(a.svg, std::ios::binary) << cc::render_svg(report);
    log("wrote " + a.svg);
  }
  log(report.verdict);
  return report.pass ? 0 : 1;
}

int run_verify(const std::string& claim_text, const std::string& manifest, const GenerateArgs& a, const Globals& g) {
  const auto claim = cc::parse_claim(claim_text);
  cc::VerifyReport r;
  if (!manifest.empty()) {
    if (!a.construction.empty()) throw CLI::ValidationError("give either --manifest or --construction");
    const auto config = apply_mode(cc::read_manifest(manifest), g.parsed_mode());
    r = cc::verify(config, claim, covering_eps(g));
  } else {
    if (a.construction.empty()) throw CLI::ValidationError("verify needs --manifest or --construction");
    const auto gen = cc::generate(to_params(a, g));
    if (claim == cc::Claim::covering || claim == cc::Claim::richness) {
      if (!gen.config) throw cc::InapplicableClaim(cc::claim_name(claim) + " needs a layered configuration");
      r = cc::verify(*gen.config, claim, covering_eps(g));
    } else {
      r = cc::verify(gen, claim, g.threads);
    }
  }
  std::ostringstream s;
  s << (r.pass ? "PASS" : "FAIL") << ' ' << r.claim << "\ncomputed " << r.computed << "\nexpected " << r.expected
    << "\n";
  if (!r.detail.empty()) s << "detail " << r.detail << "\n";
  emit(g, s.str());
  return r.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Count distance chains and tree embeddings in layered point sets"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--eps", g.eps, "construction eps, or covering eps (default 1/2)");
  app.add_option("--mode", g.mode, "exact or tol:<eps>");
  app.add_option("--out,-o", g.out, "output path (stdout when omitted)");
  app.add_option("--threads", g.threads, "worker threads; results never depend on it")
      ->envname("CHAIN_CENSUS_THREADS")
      ->check(CLI::Range(1u, 1024u));

  GenerateArgs gen_args;
  auto* gen = app.add_subcommand("generate", "build a construction and write its manifest to --out");
  add_generate_options(gen, gen_args, true);

  std::string manifest;
  auto* count = app.add_subcommand("count", "chains, walks and incidences of a manifest");
  count->add_option("manifest", manifest, "layered manifest")->required()->check(CLI::ExistingFile);

  std::string tree_manifest;
  auto* count_tree = app.add_subcommand("count-tree", "tree embeddings of a tree manifest");
  count_tree->add_option("manifest", tree_manifest, "tree manifest")->required()->check(CLI::ExistingFile);

  std::string pfile, qfile, d2;
  auto* inc = app.add_subcommand("incidences", "ordered pairs of P x Q at squared distance d2");
  inc->add_option("P", pfile, "points file")->required()->check(CLI::ExistingFile);
  inc->add_option("Q", qfile, "points file")->required()->check(CLI::ExistingFile);
  inc->add_option("--d2", d2, "squared distance")->required();

  std::string target, reference;
  std::optional<std::uint64_t> r;
  auto* rich = app.add_subcommand("rich", "r-rich points, or the dyadic richness classes without --r");
  rich->add_option("target", target, "points file")->required()->check(CLI::ExistingFile);
  rich->add_option("reference", reference, "points file")->required()->check(CLI::ExistingFile);
  rich->add_option("--d2", d2, "squared distance")->required();
  rich->add_option("--r", r, "richness threshold")->check(CLI::PositiveNumber);

  std::size_t max_sequences = 1000000;
  auto* decompose = app.add_subcommand("decompose", "stable covering of a manifest's chains");
  decompose->add_option("manifest", manifest, "layered manifest")->required()->check(CLI::ExistingFile);
  decompose->add_option("--max-sequences", max_sequences, "abort above this many sequences");

  ExperimentArgs ex;
  auto* exp = app.add_subcommand("experiment", "sweep n, count, and fit the exponent");
  exp->add_option("--construction,-c", ex.construction, "construction id")->required();
  exp->add_option("--k,-k", ex.k, "chain length (edges)");
  exp->add_option("--ns", ex.ns, "values of n")->required()->delimiter(',');
  exp->add_option("--csv", ex.csv, "CSV path (default --out or stdout)");
  exp->add_option("--svg", ex.svg, "log-log scatter path");
  exp->add_flag("--timings", ex.timings, "fill the seconds column");
  exp->add_option("--tolerance", ex.tolerance, "allowed |slope - theory|")->capture_default_str();

  std::string claim, verify_manifest;
  GenerateArgs verify_args;
  auto* ver = app.add_subcommand("verify", "check a claim: closed-form, floor, covering or richness");
  ver->add_option("--claim", claim, "claim to check")->required();
  ver->add_option("--manifest", verify_manifest, "layered manifest")->check(CLI::ExistingFile);
  add_generate_options(ver, verify_args, false);

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) return run_generate(gen_args, g);
    if (*count) return run_count(manifest, g);
    if (*count_tree) return run_count_tree(tree_manifest, g);
    if (*inc) return run_incidences(pfile, qfile, d2, g);
    if (*rich) return run_rich(target, reference, d2, r, g);
    if (*decompose) return run_decompose(manifest, max_sequences, g);
    if (*exp) return run_experiment(ex, g);
    if (*ver) return run_verify(claim, verify_manifest, verify_args, g);
  } catch (const CLI::Error& e) {
    log(e.what());
    return 2;
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return 1;
  }
  return 0;
}
