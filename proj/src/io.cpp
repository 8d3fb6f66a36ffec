#include "chain_census/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace chain_census {
namespace {

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

bool skippable(const std::vector<std::string>& t) { return t.empty() || t.front().front() == '#'; }

std::size_t parse_size(const std::string& text, const std::string& what) {
  if (text.empty() || !std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw FormatError("expected a nonnegative integer for " + what + ", got '" + text + "'");
  }
  return static_cast<std::size_t>(std::stoull(text));
}

double parse_double_strict(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw FormatError("not a number: '" + text + "'");
  }
  if (used != text.size()) throw FormatError("not a number: '" + text + "'");
  return v;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  return out;
}

ComparisonMode parse_mode_tokens(const std::vector<std::string>& t) {
  if (t.size() == 2 && t[1] == "exact") return ComparisonMode::exact();
  if (t.size() == 3 && t[1] == "tol") return ComparisonMode::tolerant(parse_double_strict(t[2]));
  throw FormatError("mode must be 'exact' or 'tol <eps>'");
}

bool same_points(const PointSet& a, const PointSet& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] == b[i])) return false;
  }
  return true;
}

// Writes each distinct layer once and returns the file name per layer.
std::vector<std::string> write_layer_files(const std::filesystem::path& manifest, const std::vector<PointSet>& layers,
                                           std::size_t dim) {
  const auto dir = manifest.parent_path();
  const std::string stem = manifest.stem().string();
  std::vector<std::string> names(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (same_points(layers[i], layers[j])) {
        names[i] = names[j];
        break;
      }
    }
    if (!names[i].empty()) continue;
    names[i] = stem + ".layer" + std::to_string(i + 1) + ".pts";
    write_points_file(dir / names[i], layers[i], dim);
  }
  return names;
}

}  // namespace

Rational parse_number(const std::string& text) {
  if (text.find('/') != std::string::npos) return Rational::parse(text);
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) negative = text[pos++] == '-';
  std::string digits;
  long frac_digits = 0;
  bool seen_point = false;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits += c;
      if (seen_point) ++frac_digits;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (digits.empty()) throw FormatError("not a number: '" + text + "'");
  long exponent = 0;
  if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
    const std::string rest = text.substr(pos + 1);
    std::size_t used = 0;
    try {
      exponent = std::stol(rest, &used);
    } catch (const std::exception&) {
      throw FormatError("bad exponent in '" + text + "'");
    }
    if (used != rest.size()) throw FormatError("bad exponent in '" + text + "'");
    pos = text.size();
  }
  if (pos != text.size()) throw FormatError("not a number: '" + text + "'");
  BigInt num(digits, 10);
  if (negative) num = -num;
  const long shift = exponent - frac_digits;
  const BigInt scale = big_pow(BigInt(10), static_cast<unsigned long>(shift < 0 ? -shift : shift));
  return shift < 0 ? Rational(num, scale) : Rational(num * scale, BigInt(1));
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_points(std::ostream& out, const PointSet& points, std::size_t dim) {
  const bool exact = points.empty() || points.front().is_exact();
  out << "dim " << dim << " count " << points.size() << " mode " << (exact ? "exact" : "float") << '\n';
  for (const auto& p : points) {
    if (p.dim() != dim) throw DimensionMismatch("point dimension differs from the header");
    if (p.is_exact() != exact) throw FormatError("a points file mixes exact and float points");
    for (std::size_t i = 0; i < dim; ++i) {
      if (i) out << ' ';
      if (exact) {
        out << p.rational_coords()[i].str();
      } else {
        out << format_double(p.float_coords()[i]);
      }
    }
    out << '\n';
  }
}

std::string points_to_string(const PointSet& points, std::size_t dim) {
  std::ostringstream out;
  write_points(out, points, dim);
  return out.str();
}

PointSet read_points(std::istream& in, std::size_t* dim_out) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    header = tokens(line);
    if (!skippable(header)) break;
    header.clear();
  }
  if (header.size() != 6 || header[0] != "dim" || header[2] != "count" || header[4] != "mode") {
    throw FormatError("malformed header; expected 'dim <d> count <m> mode <exact|float>'");
  }
  const std::size_t dim = parse_size(header[1], "dim");
  const std::size_t count = parse_size(header[3], "count");
  if (dim == 0) throw FormatError("dim must be positive");
  bool exact = false;
  if (header[5] == "exact") {
    exact = true;
  } else if (header[5] != "float") {
    throw FormatError("mode must be exact or float");
  }
  PointSet points;
  points.reserve(count);
  while (std::getline(in, line)) {
    ++line_no;
    auto t = tokens(line);
    if (skippable(t)) continue;
    if (points.size() == count) throw FormatError("more points than the header count (line " + std::to_string(line_no) + ")");
    if (t.size() != dim) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) + " coordinates");
    }
    const auto id = static_cast<std::int64_t>(points.size());
    if (exact) {
      std::vector<Rational> c;
      for (const auto& s : t) {
        try {
          c.push_back(Rational::parse(s));
        } catch (const ArithmeticError& e) {
          throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
        } catch (const std::invalid_argument& e) {
          throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
        }
      }
      points.push_back(Point::exact(std::move(c), id));
    } else {
      std::vector<double> c;
      for (const auto& s : t) c.push_back(parse_double_strict(s));
      try {
        points.push_back(Point::floating(std::move(c), id));
      } catch (const std::invalid_argument& e) {
        throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  if (points.size() != count) {
    throw FormatError("header promises " + std::to_string(count) + " points, found " + std::to_string(points.size()));
  }
  if (dim_out) *dim_out = dim;
  return points;
}

PointSet read_points_file(const std::filesystem::path& path, std::size_t* dim) {
  auto in = open_in(path);
  try {
    return read_points(in, dim);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_points_file(const std::filesystem::path& path, const PointSet& points, std::size_t dim) {
  auto out = open_out(path);
  write_points(out, points, dim);
}

std::string mode_to_manifest(const ComparisonMode& mode) {
  return mode.is_exact() ? "exact" : "tol " + format_double(mode.eps());
}

LayeredConfig read_manifest(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::optional<std::size_t> k, dim;
  std::optional<ComparisonMode> mode;
  std::optional<std::vector<Rational>> delta2;
  std::map<std::size_t, std::string> files;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = tokens(line);
    if (skippable(t)) continue;
    if (t[0] == "k" && t.size() == 2) {
      k = parse_size(t[1], "k");
    } else if (t[0] == "dim" && t.size() == 2) {
      dim = parse_size(t[1], "dim");
    } else if (t[0] == "mode") {
      mode = parse_mode_tokens(t);
    } else if (t[0] == "delta2") {
      delta2.emplace();
      for (std::size_t i = 1; i < t.size(); ++i) delta2->push_back(parse_number(t[i]));
    } else if (t[0] == "layer" && t.size() == 3) {
      files[parse_size(t[1], "layer index")] = t[2];
    } else {
      throw FormatError("unrecognized manifest line: " + line);
    }
  }
  if (!k || !dim || !mode || !delta2) throw FormatError("manifest needs k, dim, mode and delta2");
  if (delta2->size() != *k) throw FormatError("delta2 lists " + std::to_string(delta2->size()) + " values for k = " + std::to_string(*k));
  std::vector<PointSet> layers;
  std::map<std::string, PointSet> cache;
  for (std::size_t i = 1; i <= *k + 1; ++i) {
    auto it = files.find(i);
    if (it == files.end()) throw FormatError("missing layer " + std::to_string(i));
    auto cached = cache.find(it->second);
    if (cached == cache.end()) {
      std::size_t file_dim = 0;
      PointSet pts = read_points_file(path.parent_path() / it->second, &file_dim);
      if (file_dim != *dim) throw FormatError("layer " + std::to_string(i) + " has dimension " + std::to_string(file_dim));
      cached = cache.emplace(it->second, std::move(pts)).first;
    }
    layers.push_back(cached->second);
  }
  if (files.size() != *k + 1) throw FormatError("manifest lists layers beyond k+1");
  return LayeredConfig(std::move(layers), DistanceSpec{*delta2, *mode}, *dim);
}

void write_manifest(const std::filesystem::path& path, const LayeredConfig& config) {
  std::vector<PointSet> layers;
  for (std::size_t i = 0; i < config.layer_count(); ++i) layers.push_back(config.layer(i));
  const auto names = write_layer_files(path, layers, config.dim());
  auto out = open_out(path);
  out << "k " << config.k() << '\n';
  out << "dim " << config.dim() << '\n';
  out << "mode " << mode_to_manifest(config.mode()) << '\n';
  out << "delta2";
  for (const auto& d : config.spec().delta2) out << ' ' << d.str();
  out << '\n';
  for (std::size_t i = 0; i < names.size(); ++i) out << "layer " << i + 1 << ' ' << names[i] << '\n';
}

TreeInput read_tree_manifest(const std::filesystem::path& path) {
  auto in = open_in(path);
  TreeInput input;
  std::optional<std::size_t> vertices, dim;
  std::optional<std::string> shared;
  std::map<std::size_t, std::string> files;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = tokens(line);
    if (skippable(t)) continue;
    if (t[0] == "vertices" && t.size() == 2) {
      vertices = parse_size(t[1], "vertices");
    } else if (t[0] == "dim" && t.size() == 2) {
      dim = parse_size(t[1], "dim");
    } else if (t[0] == "mode") {
      input.mode = parse_mode_tokens(t);
    } else if (t[0] == "edge" && t.size() == 4) {
      const std::size_t a = parse_size(t[1], "edge vertex");
      const std::size_t b = parse_size(t[2], "edge vertex");
      if (a == 0 || b == 0) throw FormatError("tree vertices are numbered from 1");
      input.tree.edges.push_back(TreeEdge{a - 1, b - 1, parse_number(t[3])});
    } else if (t[0] == "layer" && t.size() == 3) {
      files[parse_size(t[1], "layer vertex")] = t[2];
    } else if (t[0] == "points" && t.size() == 2) {
      shared = t[1];
    } else {
      throw FormatError("unrecognized tree manifest line: " + line);
    }
  }
  if (!vertices || !dim) throw FormatError("tree manifest needs vertices and dim");
  input.tree.vertex_count = *vertices;
  input.dim = *dim;
  try {
    input.tree.validate();
  } catch (const InvalidConfig& e) {
    throw FormatError(std::string("invalid tree: ") + e.what());
  }
  std::map<std::string, PointSet> cache;
  auto load = [&](const std::string& name) -> const PointSet& {
    auto it = cache.find(name);
    if (it == cache.end()) {
      std::size_t file_dim = 0;
      PointSet pts = read_points_file(path.parent_path() / name, &file_dim);
      if (file_dim != *dim) throw FormatError(name + " has dimension " + std::to_string(file_dim));
      it = cache.emplace(name, std::move(pts)).first;
    }
    return it->second;
  };
  for (std::size_t v = 1; v <= *vertices; ++v) {
    auto it = files.find(v);
    if (it != files.end()) {
      input.layers.push_back(load(it->second));
    } else if (shared) {
      input.layers.push_back(load(*shared));
    } else {
      throw FormatError("missing layer for vertex " + std::to_string(v));
    }
  }
  return input;
}

void write_tree_manifest(const std::filesystem::path& path, const TreeInput& input) {
  const auto names = write_layer_files(path, input.layers, input.dim);
  auto out = open_out(path);
  out << "vertices " << input.tree.vertex_count << '\n';
  out << "dim " << input.dim << '\n';
  out << "mode " << mode_to_manifest(input.mode) << '\n';
  for (const auto& e : input.tree.edges) out << "edge " << e.a + 1 << ' ' << e.b + 1 << ' ' << e.d2.str() << '\n';
  for (std::size_t v = 0; v < names.size(); ++v) out << "layer " << v + 1 << ' ' << names[v] << '\n';
}

}  // namespace chain_census
