#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "chain_census/experiment.hpp"
#include "chain_census/io.hpp"
#include "oracles.hpp"

using namespace chain_census;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("chain_census_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PointSet parse(const std::string& text) {
  std::istringstream in(text);
  return read_points(in);
}

}  // namespace

TEST_CASE("number parsing") {
  CHECK(parse_number("0.25") == Rational(1, 4));
  CHECK(parse_number("-3") == Rational(-3));
  CHECK(parse_number("1e-3") == Rational(1, 1000));
  CHECK(parse_number("2.5E2") == Rational(250));
  CHECK(parse_number("6/8") == Rational(3, 4));
  CHECK_THROWS(parse_number("1/0"));
  CHECK_THROWS_AS(parse_number("x"), FormatError);
  CHECK(std::stod(format_double(0.1)) == 0.1);
}

TEST_CASE("points format") {
  const auto pts = parse("dim 2 count 1 mode exact\n1/2 1/2\n");
  REQUIRE(pts.size() == 1);
  CHECK(pts[0] == Point::exact({Rational(1, 2), Rational(1, 2)}));

  CHECK_THROWS_AS(parse("dim 2 count 2 mode exact\n1 2\n"), FormatError);
  CHECK_THROWS_AS(parse("dim 2 mode exact\n1 2\n"), FormatError);
  CHECK_THROWS_AS(parse("dim 2 count 1 mode exact\n1 2 3\n"), FormatError);
  CHECK_THROWS(parse("dim 2 count 1 mode exact\n1/0 2\n"));
  CHECK_THROWS_AS(parse("dim 2 count 1 mode float\n1 2\n3 4\n"), FormatError);

  const auto fl = parse("dim 3 count 1 mode float\n0.1 -2 1e-3\n");
  CHECK_FALSE(fl[0].is_exact());
  CHECK(fl[0].float_coords()[0] == 0.1);
}

TEST_CASE("generated sets round trip byte for byte") {
  const auto exact = gen_orthogonal_circles(4, 1, 20).layer(0);
  const std::string a = points_to_string(exact, 4);
  CHECK(points_to_string(parse(a), 4) == a);
  CHECK(parse(a) == exact);

  const auto floaty = gen_planar_chain(3, {1, 1, 1}, 12, 0.1);
  for (std::size_t i = 0; i < floaty.layer_count(); ++i) {
    const std::string s = points_to_string(floaty.layer(i), 2);
    CHECK(points_to_string(parse(s), 2) == s);
    CHECK(parse(s) == floaty.layer(i));
  }
}

TEST_CASE("manifests") {
  TempDir dir;
  {
    std::ofstream(dir.path / "a.pts") << "dim 2 count 1 mode exact\n0 0\n";
    std::ofstream(dir.path / "b.pts") << "dim 2 count 1 mode exact\n3/5 4/5\n";
    std::ofstream(dir.path / "m.txt") << "k 1\ndim 2\nmode exact\ndelta2 1\nlayer 1 a.pts\nlayer 2 b.pts\n";
    const auto config = read_manifest(dir.path / "m.txt");
    CHECK(config.layer_count() == 2);
    CHECK(count_chains(config) == 1);
  }
  {
    std::ofstream(dir.path / "bad.txt") << "k 2\ndim 2\nmode exact\ndelta2 1\nlayer 1 a.pts\nlayer 2 b.pts\nlayer 3 a.pts\n";
    CHECK_THROWS_AS(read_manifest(dir.path / "bad.txt"), FormatError);
    std::ofstream(dir.path / "missing.txt") << "k 1\ndim 2\nmode exact\ndelta2 1\nlayer 1 a.pts\n";
    CHECK_THROWS_AS(read_manifest(dir.path / "missing.txt"), FormatError);
  }
  {
    const auto r = gen_3d_odd_regular(3, 27);
    write_manifest(dir.path / "odd.txt", r.config);
    const std::string text = slurp(dir.path / "odd.txt");
    std::set<std::string> files;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
      if (line.rfind("layer ", 0) == 0) files.insert(line.substr(line.rfind(' ') + 1));
    CHECK(files.size() == 1);
    const auto back = read_manifest(dir.path / "odd.txt");
    CHECK(back.layer_count() == 4);
    CHECK(count_chains(back) == count_chains(r.config));
  }
  {
    const auto planar = gen_planar_chain(4, {1, 2, 1, 1}, 6, 0.1);
    write_manifest(dir.path / "planar.txt", planar);
    const auto back = read_manifest(dir.path / "planar.txt");
    CHECK(back.mode() == planar.mode());
    for (std::size_t i = 0; i < planar.layer_count(); ++i) CHECK(back.layer(i) == planar.layer(i));
  }
}

TEST_CASE("tree manifests") {
  TempDir dir;
  const auto star = gen_star(2, 8);
  TreeInput in{star.layers, star.tree, star.mode, 2};
  write_tree_manifest(dir.path / "t.txt", in);
  const auto back = read_tree_manifest(dir.path / "t.txt");
  CHECK(back.tree == star.tree);
  CHECK(count_tree_embeddings(back.layers, back.tree, back.mode) == 16);

  std::ofstream(dir.path / "sq.pts") << "dim 2 count 4 mode exact\n0 0\n1 0\n0 1\n1 1\n";
  std::ofstream(dir.path / "shared.txt") << "vertices 3\ndim 2\nmode exact\nedge 1 2 1\nedge 2 3 1\npoints sq.pts\n";
  const auto shared = read_tree_manifest(dir.path / "shared.txt");
  CHECK(count_tree_embeddings(shared.layers, shared.tree, shared.mode) == 8);
  std::ofstream(dir.path / "cyc.txt") << "vertices 3\ndim 2\nmode exact\nedge 1 2 1\nedge 2 1 1\npoints sq.pts\n";
  CHECK_THROWS_AS(read_tree_manifest(dir.path / "cyc.txt"), FormatError);
}

TEST_CASE("exponent fit") {
  const std::vector<double> n{2, 4, 8, 16, 32};
  std::vector<BigInt> sq, flat, cube;
  for (double v : n) {
    const auto x = static_cast<unsigned long>(v);
    sq.push_back(BigInt(x * x));
    flat.push_back(BigInt(7));
    cube.push_back(BigInt(2 * x * x * x));
  }
  const auto a = fit_exponent(n, sq);
  REQUIRE(a.ok);
  CHECK(std::abs(a.slope - 2.0) <= 1e-9);
  CHECK(a.r2 == doctest::Approx(1.0));
  CHECK(std::abs(fit_exponent(n, flat).slope) <= 1e-12);
  const auto c = fit_exponent(n, cube);
  CHECK(std::abs(c.slope - 3.0) <= 1e-9);
  CHECK(std::abs(c.intercept - std::log(2.0)) <= 1e-9);

  const auto single = fit_exponent({16}, {BigInt(256)});
  CHECK_FALSE(single.ok);
  CHECK_FALSE(single.notice.empty());

  const auto zeros = fit_exponent({2, 4, 8, 16}, {BigInt(0), BigInt(16), BigInt(64), BigInt(256)});
  CHECK(zeros.ok);
  CHECK(zeros.excluded == std::vector<std::size_t>{0});
}

TEST_CASE("experiments") {
  ExperimentSpec spec;
  spec.construction = "3d-even";
  spec.k = 4;
  spec.ns = {32, 8, 16};
  const auto report = run_experiment(spec);
  REQUIRE(report.fit.ok);
  CHECK(std::abs(report.fit.slope - 3.0) <= 0.05);
  CHECK(report.pass);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.rows[0].n == 8);
  CHECK(report.rows[0].chains == 512);
  const std::string csv = experiment_csv(report);
  CHECK(csv.rfind("construction,k,n,chains,walks,incidences,seconds\n", 0) == 0);
  CHECK(csv.find("3d-even,4,8,512,") != std::string::npos);
  CHECK(csv == experiment_csv(run_experiment(spec)));
  const std::string svg = render_svg(report);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);

  ExperimentSpec one = spec;
  one.ns = {8};
  const auto skipped = run_experiment(one);
  CHECK_FALSE(skipped.fit.ok);
  CHECK_FALSE(skipped.pass);
  CHECK_FALSE(skipped.fit.notice.empty());

  ExperimentSpec bad = spec;
  bad.construction = "3d-even";
  bad.k = 3;
  const auto failed = run_experiment(bad);
  CHECK_FALSE(failed.pass);
  for (const auto& row : failed.rows) CHECK_FALSE(row.error.empty());

  CHECK(theory_exponent("planar", 5) == Rational(3));
  CHECK(theory_exponent("3d-even", 4) == Rational(3));
  CHECK_FALSE(theory_exponent("star", 2).has_value());
}

TEST_CASE("k = 1 mod 3 fit is at least the planar exponent") {
  ExperimentSpec spec;
  spec.construction = "k1mod3";
  spec.k = 4;
  spec.ns = {16, 32, 64, 128};
  const auto report = run_experiment(spec);
  REQUIRE(report.fit.ok);
  CHECK(report.fit.slope >= 2.0 - 0.2);
  for (const auto& row : report.rows) CHECK(row.meets_certificate);
}

TEST_CASE("verify") {
  GenerateParams p;
  p.construction = "planar";
  p.k = 2;
  p.n = 50;
  const auto g = generate(p);
  const auto closed = verify(g, Claim::closed_form);
  CHECK(closed.pass);
  CHECK(closed.computed == "2500");
  CHECK(closed.expected == "2500");
  CHECK(verify(g, Claim::floor).pass);

  GenerateParams s;
  s.construction = "split";
  s.n = 100;
  const auto split = generate(s);
  CHECK(verify(split, Claim::floor).pass);
  CHECK_THROWS_AS(verify(split, Claim::closed_form), InapplicableClaim);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto config = oracle::random_config(rng, 3, 5, 2);
    CHECK(verify(config, Claim::richness).pass);
    CHECK(verify(config, Claim::covering).pass);
  }
  CHECK(parse_claim("closed-form") == Claim::closed_form);
  CHECK(claim_name(Claim::covering) == "covering");
  CHECK_THROWS(parse_claim("nonsense"));
}

TEST_CASE("every construction id generates") {
  for (const auto& id : construction_ids()) {
    GenerateParams p;
    p.construction = id;
    p.n = 16;
    p.k = id == "3d-even" ? 2 : (id == "3d-odd-regular" || id == "3d-odd-sphere" ? 3 : (id == "k1mod3" ? 4 : (id == "split" ? 1 : 2)));
    p.l = 2;
    CAPTURE(id);
    const auto g = generate(p);
    if (is_tree_construction(id)) {
      REQUIRE(g.tree.has_value());
      CHECK(count_tree_embeddings(g.tree->layers, g.tree->tree, g.tree->mode) >= g.tree->floor);
    } else {
      REQUIRE(g.config.has_value());
      const BigInt c = count_chains(*g.config);
      if (g.certificate == Certificate::closed_form) CHECK(c == g.expected);
      if (g.certificate == Certificate::floor) CHECK(c >= g.expected);
    }
  }
  GenerateParams bad;
  bad.construction = "nope";
  CHECK_THROWS(generate(bad));
}
