#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "chain_census/rational.hpp"

namespace chain_census {

enum class ScalarKind { exact, floating };

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A point of R^d. Exact points carry Rational coordinates (plus a cached
// double approximation used only for spatial hashing); floating points
// carry doubles. Identity is coordinate equality: exact equality for
// Rationals, bitwise equality for doubles. The id never takes part in it.
class Point {
 public:
  Point() = default;
  static Point exact(std::vector<Rational> coords, std::int64_t id = 0);
  static Point floating(std::vector<double> coords, std::int64_t id = 0);

  ScalarKind kind() const { return kind_; }
  bool is_exact() const { return kind_ == ScalarKind::exact; }
  std::size_t dim() const { return approx_.size(); }
  std::int64_t id() const { return id_; }
  void set_id(std::int64_t id) { id_ = id; }

  // Throws std::logic_error for floating points.
  const std::vector<Rational>& rational_coords() const;
  // Exact coordinates for floating points, nearest-double approximation otherwise.
  const std::vector<double>& float_coords() const { return approx_; }

  Point to_floating() const;

  friend bool operator==(const Point& a, const Point& b);

 private:
  ScalarKind kind_ = ScalarKind::floating;
  std::vector<Rational> exact_;
  std::vector<double> approx_;
  std::int64_t id_ = 0;
};

// Strict weak ordering consistent with Point identity.
struct PointIdentityLess {
  bool operator()(const Point& a, const Point& b) const;
};

using PointSet = std::vector<Point>;

// Reassigns ids 0..n-1 in order.
void renumber(PointSet& points);

// How squared distances are compared against a target.
class ComparisonMode {
 public:
  static constexpr double kDefaultEps = 1e-9;
  static constexpr double kGuardFactor = 100.0;

  static ComparisonMode exact() { return ComparisonMode(true, 0.0); }
  static ComparisonMode tolerant(double eps = kDefaultEps);
  // "exact" or "tol:<eps>".
  static ComparisonMode parse(const std::string& text);

  bool is_exact() const { return exact_; }
  double eps() const { return eps_; }
  ScalarKind scalar_kind() const { return exact_ ? ScalarKind::exact : ScalarKind::floating; }
  std::string str() const;

  friend bool operator==(const ComparisonMode&, const ComparisonMode&) = default;

 private:
  ComparisonMode(bool exact, double eps) : exact_(exact), eps_(eps) {}
  bool exact_ = true;
  double eps_ = 0.0;
};

// Squared distances delta_i^2 and the comparison mode. delta is never
// stored un-squared.
struct DistanceSpec {
  std::vector<Rational> delta2;
  ComparisonMode mode = ComparisonMode::exact();

  // Every entry positive; tolerant eps < min(delta2)/100.
  void validate() const;
};

using Scalar = std::variant<Rational, double>;

// Exact when both points are exact, floating otherwise.
Scalar squared_distance(const Point& p, const Point& q);
Rational squared_distance_exact(const Point& p, const Point& q);
double squared_distance_float(const Point& p, const Point& q);

bool matches_distance(const Point& p, const Point& q, const Rational& d2, const ComparisonMode& mode);
// Also checks the precondition that d2 is one of spec.delta2.
bool matches_distance(const Point& p, const Point& q, const Rational& d2, const DistanceSpec& spec);

// Precomputed comparison against one squared distance; the hot-loop form of
// matches_distance.
class DistanceMatcher {
 public:
  DistanceMatcher(Rational d2, ComparisonMode mode);

  bool operator()(const Point& p, const Point& q) const;
  // Tolerant mode: |sd - d2| in (eps, 100 eps]. Always false in exact mode.
  bool in_guard_band(const Point& p, const Point& q) const;

  const Rational& d2() const { return d2_; }
  double d2_float() const { return d2_float_; }
  const ComparisonMode& mode() const { return mode_; }
  // Largest squared distance that either matches or falls in the guard band.
  double search_radius2() const;

 private:
  Rational d2_;
  double d2_float_;
  ComparisonMode mode_;
};

struct SeparationReport {
  bool stable = true;
  std::size_t offending_pairs = 0;
  // Largest |sd - d2| among offending pairs, in units of eps.
  double worst_ratio = 0.0;
};

// Flags pairs of P x Q whose squared distance is within 100 eps of d2 but
// not within eps: such a set could count differently under re-evaluation.
SeparationReport certify_separation(std::span<const Point> P, std::span<const Point> Q,
                                    const Rational& d2, double eps);

class NoRationalPoint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A rational point (a, b) with a^2 + b^2 = r2, if one can be found. r2 = p/q
// has one iff p*q is a sum of two integer squares; the search covers
// p*q <= 10^12 and prefers the largest first coordinate.
std::optional<std::array<Rational, 2>> find_rational_point_on_circle(const Rational& r2);

// center + R(t) seed, with R(t) the rotation cos = (1-t^2)/(1+t^2),
// sin = 2t/(1+t^2). Exact.
Point rational_circle_point(const Point& center, const std::array<Rational, 2>& seed, const Rational& t);

// m distinct exact points at squared distance r2 from a planar center, with
// parameters t evenly spaced over [t_lo, t_hi]. Throws NoRationalPoint when
// no seed is supplied and none is found, std::invalid_argument for an empty
// range.
PointSet rational_circle_points(const Point& center, const Rational& r2, std::size_t m,
                                const Rational& t_lo, const Rational& t_hi,
                                std::optional<std::array<Rational, 2>> seed = std::nullopt);

// Real intersection points of two planar circles (float). Two points are
// ordered with the left side of c1->c2 first. Throws for concentric circles.
PointSet circle_circle_intersection(const Point& c1, double r1sq, const Point& c2, double r2sq);

struct Circle3 {
  std::array<double, 3> center{};
  std::array<double, 3> axis{};  // unit
  double rho2 = 0.0;
};

struct SphereIntersection {
  enum class Kind { circle, tangent, empty };
  Kind kind = Kind::empty;
  Circle3 circle;
};

SphereIntersection sphere_sphere_intersection_circle(const Point& c1, double r1sq, const Point& c2,
                                                     double r2sq);

// m float points evenly spaced on the circle, starting at angle 2*pi*phase/m.
PointSet sample_circle_3d(const Circle3& circle, std::size_t m, double phase = 0.0);

}  // namespace chain_census
