#pragma once

// Exact rational arithmetic on arbitrary-precision integers.
//
// Scheduling quantities (budgets, window bounds, utilizations) must be exact:
// replenishment amounts are utilization * window length, and window bounds are
// minima over client deadlines, so floating point would accumulate error and
// break the "budget is exactly zero at the window end" invariant the scheduler
// relies on. Values are kept in lowest terms with a positive denominator.

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <stdexcept>
#include <string>
#include <utility>

namespace runsched {

using BigInt = boost::multiprecision::cpp_int;

class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(long long n) : num_(n), den_(1) {}  // NOLINT: implicit by design
  Rational(BigInt n) : num_(std::move(n)), den_(1) {}
  Rational(BigInt n, BigInt d) : num_(std::move(n)), den_(std::move(d)) { normalize(); }

  const BigInt& num() const { return num_; }
  const BigInt& den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }

  Rational operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("rational division by zero");
    return Rational(a.num_ * b.den_, a.den_ * b.num_);
  }

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    // denominators are positive, so cross-multiplication preserves order
    const BigInt lhs = a.num_ * b.den_;
    const BigInt rhs = b.num_ * a.den_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  // Largest integer <= value (true floor, also for negatives).
  BigInt floor() const {
    BigInt q = num_ / den_;
    if (num_ < 0 && q * den_ != num_) --q;
    return q;
  }
  BigInt ceil() const { return -(-*this).floor(); }

  double to_double() const {
    return boost::multiprecision::cpp_rational(num_, den_).convert_to<double>();
  }

  // "p" for integers, "p/q" otherwise.
  std::string to_string() const {
    std::string s = num_.str();
    if (den_ != 1) {
      s += '/';
      s += den_.str();
    }
    return s;
  }

  // Accepts "p" or "p/q" with an optional leading '-' on either part.
  static Rational parse(const std::string& text) {
    const auto slash = text.find('/');
    if (slash == std::string::npos) return Rational(parse_int(text), 1);
    return Rational(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
  }

 private:
  static BigInt parse_int(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty number in rational literal");
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) throw std::invalid_argument("sign without digits in rational literal");
    for (; i < s.size(); ++i)
      if (s[i] < '0' || s[i] > '9')
        throw std::invalid_argument("bad character in rational literal: " + s);
    return BigInt(s);
  }

  void normalize() {
    if (den_ == 0) throw std::domain_error("rational with zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    BigInt g = boost::multiprecision::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
    if (num_ == 0) den_ = 1;
  }

  BigInt num_;
  BigInt den_;
};

inline Rational abs(const Rational& r) { return r < Rational(0) ? -r : r; }

// lcm of the denominators of a range of Rationals; the common grid they live on.
template <class It>
BigInt common_denominator(It first, It last) {
  BigInt l = 1;
  for (; first != last; ++first) l = boost::multiprecision::lcm(l, first->den());
  return l;
}

}  // namespace runsched
