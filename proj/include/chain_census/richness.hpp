#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "chain_census/geometry.hpp"
#include "chain_census/layered.hpp"
#include "chain_census/rational.hpp"

namespace chain_census {

// Points of `target` with at least r points of `reference` at squared
// distance d2, in their original order.
PointSet rich_points(const PointSet& target, const PointSet& reference, const Rational& d2, std::uint64_t r,
                     const ComparisonMode& mode);

// Members have richness in [lo, hi). alpha is log_n(lo) for presentation.
struct RichnessClass {
  double alpha = 0.0;
  PointSet points;
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
};

// Nonempty classes [2^i, 2^(i+1)) in increasing i. Zero-degree points fall
// in no class.
std::vector<RichnessClass> dyadic_partition(const PointSet& target, const PointSet& reference, const Rational& d2,
                                            const ComparisonMode& mode);

// Parity 1 filters left to right: R_1 is kept, then R_i keeps points whose
// richness toward the filtered R_{i-1} lies in [n^alpha_i, n^(alpha_i+eps)).
// Parity 0 mirrors this from R_{k+1} down. alpha has k+1 entries; the one
// for the unfiltered end layer is ignored.
LayeredConfig operator_D(int parity, const LayeredConfig& config, const std::vector<Rational>& alpha,
                         const Rational& eps, std::uint64_t n_ref);

// Reference size used by the covering: max(2, largest layer).
std::uint64_t covering_reference_size(const LayeredConfig& config);

struct DecompositionSequence {
  std::vector<std::vector<Rational>> gamma;
  bool stable_at_last = false;
  // Product sizes |P^(gamma_1..gamma_j)| for j = 0..length.
  std::vector<BigInt> class_sizes;
  // Indices into the original layers of the final class.
  std::vector<std::vector<std::uint32_t>> members;

  std::size_t length() const { return gamma.size(); }
  bool contains(const std::vector<std::uint32_t>& tuple) const;
};

struct Covering {
  std::vector<DecompositionSequence> sequences;
  std::uint64_t n_ref = 2;
  Rational eps;
  std::size_t expanded = 0;  // distinct products expanded

  // length <= (k+1)/eps + 1 for every sequence.
  bool lengths_bounded(std::size_t k) const;
};

class CoveringTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sequences stable at their last coordinate, unstable before, with a
// nonempty class. eps must be in (0, 1].
Covering stable_covering(const LayeredConfig& config, const Rational& eps, std::size_t max_sequences = 1000000);

struct RichnessRow {
  std::uint64_t r = 0;
  std::uint64_t rich = 0;        // |rich_points(Q, P, r)|
  std::uint64_t incidences = 0;  // incidences(P, rich set)
};

struct RichnessReport {
  bool holds = true;
  std::uint64_t total_incidences = 0;
  std::vector<RichnessRow> rows;
  // max over rows of r |rich| / incidences; 1 means equality somewhere.
  double tightest_ratio = 0.0;
};

// r |rich(Q, P, r)| <= incidences(P, rich) <= incidences(P, Q) for every
// realized richness r.
RichnessReport check_richness_bound(const PointSet& P, const PointSet& Q, const Rational& d2,
                                    const ComparisonMode& mode);

}  // namespace chain_census
