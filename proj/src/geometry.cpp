#include "chain_census/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

namespace chain_census {

Point Point::exact(std::vector<Rational> coords, std::int64_t id) {
  if (coords.empty()) throw std::invalid_argument("point dimension must be >= 1");
  Point p;
  p.kind_ = ScalarKind::exact;
  p.approx_.reserve(coords.size());
  for (const auto& c : coords) p.approx_.push_back(c.to_double());
  p.exact_ = std::move(coords);
  p.id_ = id;
  return p;
}

Point Point::floating(std::vector<double> coords, std::int64_t id) {
  if (coords.empty()) throw std::invalid_argument("point dimension must be >= 1");
  for (double c : coords) {
    if (!std::isfinite(c)) throw std::invalid_argument("non-finite coordinate");
  }
  Point p;
  p.kind_ = ScalarKind::floating;
  p.approx_ = std::move(coords);
  p.id_ = id;
  return p;
}

const std::vector<Rational>& Point::rational_coords() const {
  if (kind_ != ScalarKind::exact) throw std::logic_error("rational_coords() on a floating point");
  return exact_;
}

Point Point::to_floating() const { return floating(approx_, id_); }

bool operator==(const Point& a, const Point& b) {
  if (a.kind_ != b.kind_ || a.dim() != b.dim()) return false;
  if (a.kind_ == ScalarKind::exact) return a.exact_ == b.exact_;
  for (std::size_t i = 0; i < a.approx_.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a.approx_[i]) != std::bit_cast<std::uint64_t>(b.approx_[i])) {
      return false;
    }
  }
  return true;
}

bool PointIdentityLess::operator()(const Point& a, const Point& b) const {
  if (a.kind() != b.kind()) return a.kind() < b.kind();
  if (a.dim() != b.dim()) return a.dim() < b.dim();
  if (a.is_exact()) {
    const auto& x = a.rational_coords();
    const auto& y = b.rational_coords();
    return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
  }
  const auto& x = a.float_coords();
  const auto& y = b.float_coords();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto bx = std::bit_cast<std::uint64_t>(x[i]);
    const auto by = std::bit_cast<std::uint64_t>(y[i]);
    if (bx != by) return bx < by;
  }
  return false;
}

void renumber(PointSet& points) {
  for (std::size_t i = 0; i < points.size(); ++i) points[i].set_id(static_cast<std::int64_t>(i));
}

ComparisonMode ComparisonMode::tolerant(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("tolerance must be positive");
  return ComparisonMode(false, eps);
}

ComparisonMode ComparisonMode::parse(const std::string& text) {
  if (text == "exact") return exact();
  if (text == "tol") return tolerant();
  if (text.rfind("tol:", 0) == 0) {
    std::size_t used = 0;
    const std::string rest = text.substr(4);
    double eps = 0.0;
    try {
      eps = std::stod(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != rest.size()) throw std::invalid_argument("malformed mode: " + text);
    return tolerant(eps);
  }
  throw std::invalid_argument("malformed mode: " + text);
}

std::string ComparisonMode::str() const {
  if (exact_) return "exact";
  std::ostringstream os;
  os.precision(17);
  os << "tol:" << eps_;
  return os.str();
}

void DistanceSpec::validate() const {
  for (const auto& d : delta2) {
    if (d.sign() <= 0) throw std::invalid_argument("squared distances must be positive");
  }
  if (!mode.is_exact() && !delta2.empty()) {
    const auto smallest = *std::min_element(delta2.begin(), delta2.end());
    if (!(mode.eps() < smallest.to_double() / 100.0)) {
      throw std::invalid_argument("tolerance must be below min(delta2)/100");
    }
  }
}

namespace {

void require_same_dim(const Point& p, const Point& q) {
  if (p.dim() != q.dim()) {
    throw DimensionMismatch("dimension mismatch: " + std::to_string(p.dim()) + " vs " +
                            std::to_string(q.dim()));
  }
}

}  // namespace

Rational squared_distance_exact(const Point& p, const Point& q) {
  require_same_dim(p, q);
  const auto& a = p.rational_coords();
  const auto& b = q.rational_coords();
  mpq_class sum = 0;
  mpq_class diff;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = a[i].raw() - b[i].raw();
    sum += diff * diff;
  }
  return Rational(sum);
}

double squared_distance_float(const Point& p, const Point& q) {
  require_same_dim(p, q);
  const auto& a = p.float_coords();
  const auto& b = q.float_coords();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

Scalar squared_distance(const Point& p, const Point& q) {
  if (p.is_exact() && q.is_exact()) return squared_distance_exact(p, q);
  return squared_distance_float(p, q);
}

bool matches_distance(const Point& p, const Point& q, const Rational& d2, const ComparisonMode& mode) {
  return DistanceMatcher(d2, mode)(p, q);
}

bool matches_distance(const Point& p, const Point& q, const Rational& d2, const DistanceSpec& spec) {
  if (std::find(spec.delta2.begin(), spec.delta2.end(), d2) == spec.delta2.end()) {
    throw std::invalid_argument("squared distance " + d2.str() + " is not one of the configured distances");
  }
  return matches_distance(p, q, d2, spec.mode);
}

DistanceMatcher::DistanceMatcher(Rational d2, ComparisonMode mode)
    : d2_(std::move(d2)), d2_float_(d2_.to_double()), mode_(mode) {}

bool DistanceMatcher::operator()(const Point& p, const Point& q) const {
  if (mode_.is_exact()) {
    if (!p.is_exact() || !q.is_exact()) throw std::invalid_argument("exact mode needs exact points");
    return squared_distance_exact(p, q) == d2_;
  }
  return std::abs(squared_distance_float(p, q) - d2_float_) <= mode_.eps();
}

bool DistanceMatcher::in_guard_band(const Point& p, const Point& q) const {
  if (mode_.is_exact()) return false;
  const double gap = std::abs(squared_distance_float(p, q) - d2_float_);
  return gap > mode_.eps() && gap <= ComparisonMode::kGuardFactor * mode_.eps();
}

double DistanceMatcher::search_radius2() const {
  if (mode_.is_exact()) return d2_float_;
  return d2_float_ + ComparisonMode::kGuardFactor * mode_.eps();
}

SeparationReport certify_separation(std::span<const Point> P, std::span<const Point> Q,
                                    const Rational& d2, double eps) {
  const DistanceMatcher matcher(d2, ComparisonMode::tolerant(eps));
  SeparationReport report;
  for (const auto& p : P) {
    for (const auto& q : Q) {
      if (matcher.in_guard_band(p, q)) {
        report.stable = false;
        ++report.offending_pairs;
        const double ratio = std::abs(squared_distance_float(p, q) - matcher.d2_float()) / eps;
        report.worst_ratio = std::max(report.worst_ratio, ratio);
      }
    }
  }
  return report;
}

std::optional<std::array<Rational, 2>> find_rational_point_on_circle(const Rational& r2) {
  if (r2.sign() <= 0) return std::nullopt;
  const BigInt den = r2.denominator();
  const BigInt target = r2.numerator() * den;
  static const BigInt kSearchLimit("1000000000000");
  if (target > kSearchLimit) return std::nullopt;
  BigInt u;
  mpz_sqrt(u.get_mpz_t(), target.get_mpz_t());
  // u >= v suffices by symmetry.
  for (; 2 * u * u >= target; --u) {
    if (auto v = exact_sqrt(target - u * u)) {
      return std::array<Rational, 2>{Rational(u, den), Rational(*v, den)};
    }
    if (u == 0) break;
  }
  return std::nullopt;
}

Point rational_circle_point(const Point& center, const std::array<Rational, 2>& seed, const Rational& t) {
  if (center.dim() != 2) throw DimensionMismatch("rational circle points need a planar center");
  const Rational t2 = t * t;
  const Rational denom = Rational(1) + t2;
  const Rational c = (Rational(1) - t2) / denom;
  const Rational s = Rational(2) * t / denom;
  const auto& o = center.rational_coords();
  return Point::exact({o[0] + c * seed[0] - s * seed[1], o[1] + s * seed[0] + c * seed[1]});
}

PointSet rational_circle_points(const Point& center, const Rational& r2, std::size_t m,
                                const Rational& t_lo, const Rational& t_hi,
                                std::optional<std::array<Rational, 2>> seed) {
  if (center.dim() != 2) throw DimensionMismatch("rational circle points need a planar center");
  if (m == 0) throw std::invalid_argument("m must be >= 1");
  if (t_hi < t_lo || (m > 1 && t_hi == t_lo)) {
    throw std::invalid_argument("parameter range holds fewer than m distinct rationals");
  }
  if (!seed) seed = find_rational_point_on_circle(r2);
  if (!seed) throw NoRationalPoint("no rational point found on x^2 + y^2 = " + r2.str());
  if ((*seed)[0] * (*seed)[0] + (*seed)[1] * (*seed)[1] != r2) {
    throw std::invalid_argument("seed point is not on the circle");
  }
  PointSet out;
  out.reserve(m);
  const Rational step = m > 1 ? (t_hi - t_lo) / Rational(static_cast<long>(m - 1)) : Rational(0);
  for (std::size_t i = 0; i < m; ++i) {
    Point p = rational_circle_point(center, *seed, t_lo + step * Rational(static_cast<long>(i)));
    p.set_id(static_cast<std::int64_t>(i));
    out.push_back(std::move(p));
  }
  return out;
}

PointSet circle_circle_intersection(const Point& c1, double r1sq, const Point& c2, double r2sq) {
  if (c1.dim() != 2 || c2.dim() != 2) throw DimensionMismatch("circle intersection is planar");
  const auto& a = c1.float_coords();
  const auto& b = c2.float_coords();
  const double dx = b[0] - a[0];
  const double dy = b[1] - a[1];
  const double d2 = dx * dx + dy * dy;
  if (d2 == 0.0) throw std::invalid_argument("concentric circles");
  const double d = std::sqrt(d2);
  const double along = (r1sq - r2sq + d2) / (2.0 * d);
  const double h2 = r1sq - along * along;
  const double tol = 1e-12 * std::max({r1sq, r2sq, d2});
  const double ux = dx / d;
  const double uy = dy / d;
  const double mx = a[0] + along * ux;
  const double my = a[1] + along * uy;
  if (h2 < -tol) return {};
  if (h2 <= tol) return {Point::floating({mx, my})};
  const double h = std::sqrt(h2);
  return {Point::floating({mx - h * uy, my + h * ux}, 0), Point::floating({mx + h * uy, my - h * ux}, 1)};
}

SphereIntersection sphere_sphere_intersection_circle(const Point& c1, double r1sq, const Point& c2,
                                                     double r2sq) {
  if (c1.dim() != 3 || c2.dim() != 3) throw DimensionMismatch("sphere intersection is 3-dimensional");
  const auto& a = c1.float_coords();
  const auto& b = c2.float_coords();
  std::array<double, 3> u{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  const double d2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
  if (d2 == 0.0) throw std::invalid_argument("concentric spheres");
  const double d = std::sqrt(d2);
  for (auto& x : u) x /= d;
  const double along = (r1sq - r2sq + d2) / (2.0 * d);
  const double rho2 = r1sq - along * along;
  const double tol = 1e-12 * std::max({r1sq, r2sq, d2});
  SphereIntersection out;
  out.circle.axis = u;
  out.circle.center = {a[0] + along * u[0], a[1] + along * u[1], a[2] + along * u[2]};
  if (rho2 < -tol) {
    out.kind = SphereIntersection::Kind::empty;
  } else if (rho2 <= tol) {
    out.kind = SphereIntersection::Kind::tangent;
    out.circle.rho2 = 0.0;
  } else {
    out.kind = SphereIntersection::Kind::circle;
    out.circle.rho2 = rho2;
  }
  return out;
}

PointSet sample_circle_3d(const Circle3& circle, std::size_t m, double phase) {
  const auto& n = circle.axis;
  // Helper axis least aligned with n.
  std::array<double, 3> helper{0.0, 0.0, 0.0};
  std::size_t smallest = 0;
  for (std::size_t i = 1; i < 3; ++i) {
    if (std::abs(n[i]) < std::abs(n[smallest])) smallest = i;
  }
  helper[smallest] = 1.0;
  std::array<double, 3> e1{helper[1] * n[2] - helper[2] * n[1], helper[2] * n[0] - helper[0] * n[2],
                           helper[0] * n[1] - helper[1] * n[0]};
  const double len = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
  for (auto& x : e1) x /= len;
  const std::array<double, 3> e2{n[1] * e1[2] - n[2] * e1[1], n[2] * e1[0] - n[0] * e1[2],
                                 n[0] * e1[1] - n[1] * e1[0]};
  const double rho = std::sqrt(circle.rho2);
  PointSet out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double theta = 2.0 * std::numbers::pi * (static_cast<double>(i) + phase) / static_cast<double>(m);
    const double c = std::cos(theta) * rho;
    const double s = std::sin(theta) * rho;
    out.push_back(Point::floating({circle.center[0] + c * e1[0] + s * e2[0],
                                   circle.center[1] + c * e1[1] + s * e2[1],
                                   circle.center[2] + c * e1[2] + s * e2[2]},
                                  static_cast<std::int64_t>(i)));
  }
  return out;
}

}  // namespace chain_census
