#pragma once

// Exact scalars used to certify operator identities without rounding:
// rationals over 64-bit integers (128-bit intermediates, overflow-checked)
// and the real quadratic field Q(sqrt 2).  Both satisfy the Scalar
// requirements of PolynomialT.

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace dirk {

class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t value) : num_(value) {}  // NOLINT: implicit by design
  Rational(std::int64_t num, std::int64_t den) { *this = reduced(num, den); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_zero() const { return num_ == 0; }
  int sign() const { return num_ > 0 ? 1 : num_ < 0 ? -1 : 0; }

  friend Rational operator+(const Rational& x, const Rational& y) {
    return reduced(w(x.num_) * y.den_ + w(y.num_) * x.den_, w(x.den_) * y.den_);
  }
  friend Rational operator-(const Rational& x, const Rational& y) {
    return reduced(w(x.num_) * y.den_ - w(y.num_) * x.den_, w(x.den_) * y.den_);
  }
  friend Rational operator*(const Rational& x, const Rational& y) {
    return reduced(w(x.num_) * y.num_, w(x.den_) * y.den_);
  }
  friend Rational operator/(const Rational& x, const Rational& y) {
    if (y.is_zero()) throw std::domain_error("rational division by zero");
    return reduced(w(x.num_) * y.den_, w(x.den_) * y.num_);
  }
  friend Rational operator-(const Rational& x) { return Rational(-x.num_, x.den_); }

  bool operator==(const Rational&) const = default;
  std::strong_ordering operator<=>(const Rational& o) const {
    return w(num_) * o.den_ <=> w(o.num_) * den_;
  }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }

  // Exact square root when the operand is a square of a rational.
  static std::optional<Rational> exact_sqrt(const Rational& r) {
    if (r.sign() < 0) return std::nullopt;
    auto n = exact_isqrt(r.num_), d = exact_isqrt(r.den_);
    if (!n || !d) return std::nullopt;
    return Rational(*n, *d);
  }

 private:
  using w = __int128;  // wide intermediate

  static std::int64_t narrow(w v) {
    if (v > std::numeric_limits<std::int64_t>::max() ||
        v < std::numeric_limits<std::int64_t>::min())
      throw std::overflow_error("rational overflow");
    return static_cast<std::int64_t>(v);
  }
  static w gcd_wide(w a, w b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      w t = a % b;
      a = b;
      b = t;
    }
    return a;
  }
  static Rational reduced(w num, w den) {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    if (w g = gcd_wide(num, den); g > 1) {
      num /= g;
      den /= g;
    }
    Rational r;
    r.num_ = narrow(num);
    r.den_ = narrow(den);
    return r;
  }
  static std::optional<std::int64_t> exact_isqrt(std::int64_t v) {
    auto guess = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(v))));
    for (std::int64_t c = guess > 2 ? guess - 2 : 0; c <= guess + 2; ++c)
      if (w(c) * c == v) return c;
    return std::nullopt;
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

// Element a + b*sqrt(2) of Q(sqrt 2).
class Surd2 {
 public:
  Surd2() = default;
  Surd2(std::int64_t value) : a_(value) {}  // NOLINT: implicit by design
  Surd2(Rational a) : a_(a) {}              // NOLINT: implicit by design
  Surd2(Rational a, Rational b) : a_(a), b_(b) {}
  static Surd2 sqrt2() { return {Rational(0), Rational(1)}; }

  const Rational& rational_part() const { return a_; }
  const Rational& sqrt2_part() const { return b_; }
  bool is_zero() const { return a_.is_zero() && b_.is_zero(); }

  // Sign of the real value; exact (compares a^2 against 2 b^2 when needed).
  int sign() const {
    const int sa = a_.sign(), sb = b_.sign();
    if (sb == 0) return sa;
    if (sa == 0) return sb;
    if (sa == sb) return sa;
    const Rational a2 = a_ * a_, b2 = Rational(2) * b_ * b_;
    if (a2 == b2) return 0;  // unreachable for nonzero values; sqrt2 irrational
    return b2 < a2 ? sa : sb;
  }

  friend Surd2 operator+(const Surd2& x, const Surd2& y) {
    return {x.a_ + y.a_, x.b_ + y.b_};
  }
  friend Surd2 operator-(const Surd2& x, const Surd2& y) {
    return {x.a_ - y.a_, x.b_ - y.b_};
  }
  friend Surd2 operator*(const Surd2& x, const Surd2& y) {
    return {x.a_ * y.a_ + Rational(2) * x.b_ * y.b_, x.a_ * y.b_ + x.b_ * y.a_};
  }
  friend Surd2 operator/(const Surd2& x, const Surd2& y) {
    if (y.is_zero()) throw std::domain_error("surd division by zero");
    const Rational norm = y.a_ * y.a_ - Rational(2) * y.b_ * y.b_;
    const Surd2 num = x * Surd2{y.a_, -y.b_};
    return {num.a_ / norm, num.b_ / norm};
  }
  friend Surd2 operator-(const Surd2& x) { return {-x.a_, -x.b_}; }
  bool operator==(const Surd2&) const = default;

  double to_double() const { return a_.to_double() + b_.to_double() * std::sqrt(2.0); }
  std::string str() const {
    if (b_.is_zero()) return a_.str();
    const Rational mag = b_.sign() < 0 ? -b_ : b_;
    return a_.str() + (b_.sign() < 0 ? " - " : " + ") + mag.str() + "*sqrt2";
  }

  // Exact principal square root when one exists in Q(sqrt 2).
  static std::optional<Surd2> exact_sqrt(const Surd2& t) {
    if (t.sign() < 0) return std::nullopt;
    if (t.is_zero()) return Surd2{};
    if (t.b_.is_zero()) {
      if (auto r = Rational::exact_sqrt(t.a_)) return Surd2{*r};
      if (auto r = Rational::exact_sqrt(t.a_ / Rational(2)))
        return Surd2{Rational(0), *r};
      return std::nullopt;
    }
    // x = a + b*sqrt2 with a^2 + 2 b^2 = t.a and 2 a b = t.b leads to
    // 8 (b^2)^2 - 4 t.a b^2 + t.b^2 = 0, i.e. b^2 = (t.a +- d) / 4 with
    // d = sqrt(t.a^2 - 2 t.b^2).
    auto d = Rational::exact_sqrt(t.a_ * t.a_ - Rational(2) * t.b_ * t.b_);
    if (!d) return std::nullopt;
    for (const Rational& u : {(t.a_ + *d) / Rational(4), (t.a_ - *d) / Rational(4)}) {
      auto b = Rational::exact_sqrt(u);
      if (!b || b->is_zero()) continue;
      const Rational a = t.b_ / (Rational(2) * *b);
      const Surd2 x{a, *b};
      if (x * x == t) return x.sign() >= 0 ? x : -x;
    }
    return std::nullopt;
  }

 private:
  Rational a_, b_;
};

}  // namespace dirk
