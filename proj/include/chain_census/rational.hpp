#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace chain_census {

// Arbitrary-precision integer used for every count.
using BigInt = mpz_class;

std::string to_string(const BigInt& value);
BigInt big_int_from_string(std::string_view text);
// Natural log of a positive integer, valid far beyond the double range.
double log_big(const BigInt& value);
BigInt big_pow(const BigInt& base, unsigned long exponent);

class ArithmeticError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Exact rational in lowest terms with a positive denominator.
class Rational {
 public:
  Rational() = default;
  Rational(long value) : value_(value) {}  // NOLINT(google-explicit-constructor)
  Rational(const BigInt& num, const BigInt& den);
  explicit Rational(const mpq_class& value);

  // Accepts "p", "-p", "p/q". Throws ArithmeticError on a zero denominator
  // and std::invalid_argument on malformed text.
  static Rational parse(std::string_view text);
  // Exact value of a finite double.
  static Rational from_double(double value);

  BigInt numerator() const { return value_.get_num(); }
  BigInt denominator() const { return value_.get_den(); }
  const mpq_class& raw() const { return value_; }

  double to_double() const { return value_.get_d(); }
  // Canonical text: "p" for integers, "p/q" otherwise.
  std::string str() const;

  int sign() const { return sgn(value_); }
  bool is_zero() const { return sign() == 0; }
  bool is_integer() const { return value_.get_den() == 1; }

  Rational& operator+=(const Rational& other);
  Rational& operator-=(const Rational& other);
  Rational& operator*=(const Rational& other);
  Rational& operator/=(const Rational& other);
  Rational operator-() const;

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) { return a.value_ == b.value_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const int c = cmp(a.value_, b.value_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  // Largest integer <= value.
  BigInt floor() const;
  BigInt ceil() const;

 private:
  mpq_class value_{0};
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

// Smallest nonnegative s with s*s >= value (value >= 0).
BigInt ceil_sqrt(const BigInt& value);
// Exact integer square root if value is a perfect square.
std::optional<BigInt> exact_sqrt(const BigInt& value);

// Exact comparison of base^(p/q) against threshold^(1) style powers:
// returns true iff value >= n^(exponent) for a nonnegative rational exponent.
bool at_least_power(const BigInt& value, const BigInt& n, const Rational& exponent);
// value < n^(exponent), exact.
bool below_power(const BigInt& value, const BigInt& n, const Rational& exponent);

}  // namespace chain_census

template <>
struct std::hash<chain_census::Rational> {
  std::size_t operator()(const chain_census::Rational& r) const noexcept;
};
