#include "chain_census/rational.hpp"

#include <cmath>
#include <ostream>

namespace chain_census {

std::string to_string(const BigInt& value) { return value.get_str(); }

BigInt big_int_from_string(std::string_view text) {
  BigInt out;
  if (text.empty() || out.set_str(std::string(text), 10) != 0) {
    throw std::invalid_argument("malformed integer: '" + std::string(text) + "'");
  }
  return out;
}

double log_big(const BigInt& value) {
  if (sgn(value) <= 0) throw ArithmeticError("log of a nonpositive integer");
  long exp2 = 0;
  const double mantissa = mpz_get_d_2exp(&exp2, value.get_mpz_t());
  return std::log(mantissa) + static_cast<double>(exp2) * std::log(2.0);
}

BigInt big_pow(const BigInt& base, unsigned long exponent) {
  BigInt out;
  mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), exponent);
  return out;
}

Rational::Rational(const BigInt& num, const BigInt& den) {
  if (den == 0) throw ArithmeticError("zero denominator");
  value_ = mpq_class(num, den);
  value_.canonicalize();
}

Rational::Rational(const mpq_class& value) : value_(value) {
  if (value_.get_den() == 0) throw ArithmeticError("zero denominator");
  value_.canonicalize();
}

Rational Rational::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    return Rational(big_int_from_string(text), BigInt(1));
  }
  const auto num = text.substr(0, slash);
  const auto den = text.substr(slash + 1);
  if (!den.empty() && (den.front() == '-' || den.front() == '+')) {
    throw std::invalid_argument("signed denominator: '" + std::string(text) + "'");
  }
  return Rational(big_int_from_string(num), big_int_from_string(den));
}

Rational Rational::from_double(double value) {
  if (!std::isfinite(value)) throw ArithmeticError("non-finite double");
  return Rational(mpq_class(value));
}

std::string Rational::str() const { return value_.get_str(); }

Rational& Rational::operator+=(const Rational& other) {
  value_ += other.value_;
  return *this;
}

Rational& Rational::operator-=(const Rational& other) {
  value_ -= other.value_;
  return *this;
}

Rational& Rational::operator*=(const Rational& other) {
  value_ *= other.value_;
  return *this;
}

Rational& Rational::operator/=(const Rational& other) {
  if (other.is_zero()) throw ArithmeticError("division by zero");
  value_ /= other.value_;
  return *this;
}

Rational Rational::operator-() const { return Rational(mpq_class(-value_)); }

BigInt Rational::floor() const {
  BigInt out;
  mpz_fdiv_q(out.get_mpz_t(), value_.get_num_mpz_t(), value_.get_den_mpz_t());
  return out;
}

BigInt Rational::ceil() const {
  BigInt out;
  mpz_cdiv_q(out.get_mpz_t(), value_.get_num_mpz_t(), value_.get_den_mpz_t());
  return out;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

BigInt ceil_sqrt(const BigInt& value) {
  if (sgn(value) < 0) throw ArithmeticError("square root of a negative integer");
  BigInt root;
  mpz_sqrt(root.get_mpz_t(), value.get_mpz_t());
  if (root * root < value) root += 1;
  return root;
}

std::optional<BigInt> exact_sqrt(const BigInt& value) {
  if (sgn(value) < 0 || mpz_perfect_square_p(value.get_mpz_t()) == 0) return std::nullopt;
  BigInt root;
  mpz_sqrt(root.get_mpz_t(), value.get_mpz_t());
  return root;
}

namespace {

// Returns sign of value^q - n^p for exponent p/q >= 0.
int compare_power(const BigInt& value, const BigInt& n, const Rational& exponent) {
  if (exponent.sign() < 0) throw ArithmeticError("negative exponent");
  const BigInt p = exponent.numerator();
  const BigInt q = exponent.denominator();
  if (!p.fits_ulong_p() || !q.fits_ulong_p()) throw ArithmeticError("exponent too large");
  const BigInt lhs = big_pow(value, q.get_ui());
  const BigInt rhs = big_pow(n, p.get_ui());
  return cmp(lhs, rhs);
}

}  // namespace

bool at_least_power(const BigInt& value, const BigInt& n, const Rational& exponent) {
  return compare_power(value, n, exponent) >= 0;
}

bool below_power(const BigInt& value, const BigInt& n, const Rational& exponent) {
  return compare_power(value, n, exponent) < 0;
}

}  // namespace chain_census

std::size_t std::hash<chain_census::Rational>::operator()(
    const chain_census::Rational& r) const noexcept {
  const auto& q = r.raw();
  const std::size_t a = mpz_get_ui(q.get_num_mpz_t()) ^ (mpz_sgn(q.get_num_mpz_t()) < 0 ? 0x9e37u : 0u);
  const std::size_t b = mpz_get_ui(q.get_den_mpz_t());
  return a * 0x9e3779b97f4a7c15ULL ^ (b + 0x7f4a7c15ULL + (a << 6) + (a >> 2));
}
