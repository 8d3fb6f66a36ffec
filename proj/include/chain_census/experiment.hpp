#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chain_census/constructions.hpp"
#include "chain_census/layered.hpp"
#include "chain_census/rational.hpp"

namespace chain_census {

// Construction ids: planar, k1mod3, split, 3d-even, 3d-odd-regular,
// 3d-odd-sphere, orthogonal (chain configs); star, tl3-center, tl3-joints
// (tree configs).
struct GenerateParams {
  std::string construction;
  std::size_t k = 2;
  std::size_t n = 16;
  std::uint64_t seed = 1;
  std::optional<double> eps;                   // per-construction default when empty
  std::optional<std::vector<Rational>> delta2;  // planar and 3d-even
  std::optional<ComparisonMode> mode;           // planar only
  std::size_t dim = 4;                          // orthogonal
  std::size_t l = 3;                            // trees
};

enum class Certificate { closed_form, floor, none };

struct Generated {
  std::string construction;
  std::optional<LayeredConfig> config;
  std::optional<TreeConstruction> tree;
  std::optional<SplitResult> split;
  Certificate certificate = Certificate::none;
  BigInt expected;  // closed form or floor
  std::string note;
};

const std::vector<std::string>& construction_ids();
bool is_tree_construction(const std::string& id);
Generated generate(const GenerateParams& params);

// Exponent predicted for the chain count of a construction; nothing for
// ids without one.
std::optional<Rational> theory_exponent(const std::string& construction, std::size_t k);

struct FitResult {
  bool ok = false;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<std::size_t> excluded;  // rows with zero counts
  std::string notice;
};

// Ordinary least squares of ln count on ln n over rows with count > 0;
// needs at least three such rows.
FitResult fit_exponent(const std::vector<double>& n, const std::vector<BigInt>& counts);

struct ExperimentRow {
  std::string construction;
  std::size_t k = 0;
  std::size_t n = 0;
  BigInt chains;
  BigInt walks;
  std::uint64_t incidences = 0;  // edges between consecutive layers
  double seconds = 0.0;
  bool meets_certificate = true;
  std::string error;
};

struct ExperimentSpec {
  std::string construction;
  std::size_t k = 2;
  std::vector<std::size_t> ns;
  std::uint64_t seed = 1;
  std::optional<double> eps;
  double tolerance = 0.2;
  unsigned threads = 1;
  bool timings = false;  // seconds column holds "na" otherwise
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<ExperimentRow> rows;  // sorted by n
  FitResult fit;
  std::optional<Rational> theory;
  bool pass = false;
  std::string verdict;
};

ExperimentReport run_experiment(const ExperimentSpec& spec);
void write_csv(std::ostream& out, const ExperimentReport& report);
std::string experiment_csv(const ExperimentReport& report);
// Log-log scatter of chains against n with the fitted line.
std::string render_svg(const ExperimentReport& report);

enum class Claim { closed_form, floor, covering, richness };
Claim parse_claim(const std::string& text);
std::string claim_name(Claim claim);

class InapplicableClaim : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct VerifyReport {
  bool pass = false;
  std::string claim;
  std::string computed;
  std::string expected;
  std::string detail;
};

// closed-form and floor check a generated construction against its
// certificate. covering and richness also accept any config.
VerifyReport verify(const Generated& generated, Claim claim, unsigned threads = 1);
VerifyReport verify(const LayeredConfig& config, Claim claim, const Rational& eps = Rational(1, 2));

}  // namespace chain_census
