#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "chain_census/geometry.hpp"
#include "chain_census/layered.hpp"

namespace chain_census {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Decimal ("0.25", "-3", "1e-3") or fraction ("1/4") to an exact Rational.
Rational parse_number(const std::string& text);

// Shortest-round-trip-safe decimal for a double ("%.17g").
std::string format_double(double value);

// Header "dim <d> count <m> mode <exact|float>", then one point per line.
// Exact coordinates are written canonically ("p" or "p/q"). Points read
// back get ids 0..m-1.
void write_points(std::ostream& out, const PointSet& points, std::size_t dim);
std::string points_to_string(const PointSet& points, std::size_t dim);
PointSet read_points(std::istream& in, std::size_t* dim = nullptr);
PointSet read_points_file(const std::filesystem::path& path, std::size_t* dim = nullptr);
void write_points_file(const std::filesystem::path& path, const PointSet& points, std::size_t dim);

// Manifest lines: "k <int>", "dim <int>", "mode exact|tol <eps>",
// "delta2 r_1 .. r_k", "layer <i> <path>" for i = 1..k+1. Paths are
// relative to the manifest. Identical layers share one points file.
LayeredConfig read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const LayeredConfig& config);

struct TreeInput {
  std::vector<PointSet> layers;  // one per vertex
  LabeledTree tree;
  ComparisonMode mode = ComparisonMode::exact();
  std::size_t dim = 0;
};

// Tree manifest: "vertices <N>", "dim <d>", "mode ...", "edge <a> <b> <d2>"
// (1-based vertices), then "layer <v> <path>" per vertex or a single
// "points <path>" shared by all vertices.
TreeInput read_tree_manifest(const std::filesystem::path& path);
void write_tree_manifest(const std::filesystem::path& path, const TreeInput& input);

std::string mode_to_manifest(const ComparisonMode& mode);

}  // namespace chain_census
