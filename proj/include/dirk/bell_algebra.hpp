#pragma once

// Free *-algebra of dichotomic party-local observables.
//
// Each party p in {0, ..., n-1} has observables X_{p,s} indexed by a setting
// s in {1, 2} (more settings are allowed by the algebra; the rest of the
// library only uses two).  The relations are:
//   X_{p,s}^2 = 1,   X_{p,s}^* = X_{p,s},   [X_{p,s}, X_{q,t}] = 0 for p != q.
// A canonical monomial therefore carries, per party, a word over the settings
// with no two adjacent letters equal; parties are kept in ascending order.
//
// Canonical enumeration order used everywhere: identity first, then graded
// (total degree), ties broken party by party with shorter words first and
// words compared lexicographically on settings.

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dirk {

inline constexpr int kMaxParties = 8;

struct PartyObservable {
  int party = 0;    // 0-based
  int setting = 1;  // 1-based
  friend bool operator==(const PartyObservable&, const PartyObservable&) = default;
};

class Monomial {
 public:
  Monomial() = default;  // identity on zero parties (useful as placeholder)
  explicit Monomial(int n_parties);

  static Monomial identity(int n_parties) { return Monomial(n_parties); }
  // Reduces an arbitrary word of generators to canonical form.
  static Monomial from_word(std::span<const PartyObservable> word, int n_parties);
  static Monomial single(PartyObservable o, int n_parties);

  int n_parties() const { return static_cast<int>(words_.size()); }
  bool is_identity() const;
  int degree() const;                 // total word length over all parties
  int degree(int party) const;        // word length of one party
  const std::vector<std::uint8_t>& word(int party) const { return words_[party]; }

  Monomial adjoint() const;           // reverses each party word

  friend Monomial operator*(const Monomial& a, const Monomial& b);

  // Graded order described in the header comment.
  std::strong_ordering operator<=>(const Monomial& other) const;
  bool operator==(const Monomial& other) const { return words_ == other.words_; }

  // "1" for the identity, otherwise factors joined with '*': "A1*B2*C2".
  std::string str() const;
  static Monomial parse(std::string_view text, int n_parties);

 private:
  // words_[p] = reduced setting word of party p (entries are settings >= 1).
  std::vector<std::vector<std::uint8_t>> words_;
  void reduce_append(int party, std::uint8_t setting);
};

// Polynomial over canonical monomials with coefficients in Scalar.
// Scalar needs +, -, *, unary -, == and value-initialization to zero;
// double and exact scalar types both qualify.
template <class Scalar>
class PolynomialT {
 public:
  PolynomialT() = default;
  explicit PolynomialT(int n_parties) : n_parties_(n_parties) {}

  static PolynomialT constant(int n_parties, const Scalar& c) {
    PolynomialT p(n_parties);
    p.add_term(Monomial::identity(n_parties), c);
    return p;
  }
  static PolynomialT from_monomial(const Monomial& m, const Scalar& c) {
    PolynomialT p(m.n_parties());
    p.add_term(m, c);
    return p;
  }

  int n_parties() const { return n_parties_; }
  const std::map<Monomial, Scalar>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  void add_term(const Monomial& m, const Scalar& c) {
    if (m.n_parties() != n_parties_) throw_party_mismatch();
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      if (!(c == Scalar{})) terms_.emplace(m, c);
    } else {
      it->second = it->second + c;
      if (it->second == Scalar{}) terms_.erase(it);
    }
  }
  Scalar coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Scalar{} : it->second;
  }

  PolynomialT& operator+=(const PolynomialT& o) {
    check_same(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  PolynomialT& operator-=(const PolynomialT& o) {
    check_same(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  PolynomialT& operator*=(const Scalar& s) {
    if (s == Scalar{}) { terms_.clear(); return *this; }
    for (auto& [m, c] : terms_) c = c * s;
    return *this;
  }
  friend PolynomialT operator+(PolynomialT a, const PolynomialT& b) { return a += b; }
  friend PolynomialT operator-(PolynomialT a, const PolynomialT& b) { return a -= b; }
  friend PolynomialT operator*(PolynomialT a, const Scalar& s) { return a *= s; }
  friend PolynomialT operator*(const Scalar& s, PolynomialT a) { return a *= s; }
  friend PolynomialT operator-(PolynomialT a) {
    for (auto& [m, c] : a.terms_) c = -c;
    return a;
  }
  friend PolynomialT operator*(const PolynomialT& a, const PolynomialT& b) {
    a.check_same(b);
    PolynomialT out(a.n_parties_);
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) out.add_term(ma * mb, ca * cb);
    return out;
  }

  PolynomialT adjoint() const {
    PolynomialT out(n_parties_);
    for (const auto& [m, c] : terms_) out.add_term(m.adjoint(), c);
    return out;
  }

  bool operator==(const PolynomialT& o) const {
    return n_parties_ == o.n_parties_ && terms_ == o.terms_;
  }

 private:
  [[noreturn]] static void throw_party_mismatch() {
    throw std::invalid_argument("expression party counts differ");
  }
  void check_same(const PolynomialT& o) const {
    if (n_parties_ != o.n_parties_) throw_party_mismatch();
  }
  int n_parties_ = 0;
  std::map<Monomial, Scalar> terms_;
};

extern template class PolynomialT<double>;
using BellExpression = PolynomialT<double>;

// ---- standard expressions ----------------------------------------------

// M   = <A1B1C1> - <A1B2C2> - <A2B1C2> - <A2B2C1>
BellExpression mermin();
// M'  = <A1B1C2> + <A1B2C1> + <A2B1C1> - <A2B2C2>
BellExpression mermin_prime();
// M + M'
BellExpression svetlichny();
// S   = <A1B1> + <A1B2> + <A2B1> - <A2B2>   (two parties)
BellExpression chsh();
// M_n = Re < prod_p (X_{p,1} + i X_{p,2}) >; has 2^(n-1) terms.
BellExpression mermin_n(int n_parties);

// ---- hierarchy levels ----------------------------------------------------

// A level is a set of per-party word-length patterns.  Text grammar: terms
// joined by '+'; the term "1" contributes the identity pattern plus every
// single-observable pattern; other terms are concatenations of party letters
// with an optional exponent, e.g. "AB", "AC", "A^2", "A^2B".
struct LevelSpec {
  int n_parties = 0;
  std::vector<std::vector<int>> patterns;  // sorted, unique; identity included

  static LevelSpec parse(std::string_view text, int n_parties);
  std::string str() const;
  bool operator==(const LevelSpec&) const = default;
};

// All canonical monomials matching the level's patterns, in canonical order.
std::vector<Monomial> enumerate_monomials(const LevelSpec& level, int n_settings = 2);

// ---- JSON (de)serialization ----------------------------------------------

// {"A1*B1*C1": 1.0, "A1*B2*C2": -1.0, ...}; "1" keys the identity.
std::string expression_to_json(const BellExpression& e);
BellExpression expression_from_json(std::string_view json_text, int n_parties);

class Behavior;  // defined in behavior.hpp

// Expectation value of an expression on a conditional-probability table.
// Every monomial must have per-party degree <= 1.  Settings of parties not
// appearing in a monomial are fixed to 1 (irrelevant for no-signalling
// behaviors).
double evaluate_on_behavior(const BellExpression& e, const Behavior& b);

}  // namespace dirk
