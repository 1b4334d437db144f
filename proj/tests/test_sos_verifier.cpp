#include <cmath>
#include <stdexcept>
#include <vector>

#include "dirk/behavior.hpp"
#include "dirk/quantum_sim.hpp"
#include "dirk/rational_surd.hpp"
#include "dirk/sos_verifier.hpp"
#include "doctest.h"

using namespace dirk;

namespace {

constexpr double kPi = 3.14159265358979323846;

Monomial swap_parties(const Monomial& m, int p, int q) {
  std::vector<PartyObservable> word;
  for (int party = 0; party < m.n_parties(); ++party) {
    const int target = party == p ? q : party == q ? p : party;
    for (auto s : m.word(party)) word.push_back({target, s});
  }
  return Monomial::from_word(word, m.n_parties());
}

BellExpression swap_parties(const BellExpression& e, int p, int q) {
  BellExpression out(e.n_parties());
  for (const auto& [m, c] : e.terms()) out.add_term(swap_parties(m, p, q), c);
  return out;
}

// Sign flip of every setting-2 observable.
BellExpression flip_setting2(const BellExpression& e) {
  BellExpression out(e.n_parties());
  for (const auto& [m, c] : e.terms()) {
    int count = 0;
    for (int party = 0; party < m.n_parties(); ++party)
      for (auto s : m.word(party)) count += s == 2;
    out.add_term(m, count % 2 ? -c : c);
  }
  return out;
}

double max_coeff_diff(const BellExpression& x, const BellExpression& y) {
  double d = 0;
  for (const auto& [m, c] : x.terms()) d = std::max(d, std::abs(c - y.coefficient(m)));
  for (const auto& [m, c] : y.terms()) d = std::max(d, std::abs(c - x.coefficient(m)));
  return d;
}

const FactoredSquare* find_square(const SosCertificate& c, const std::string& name) {
  for (const auto& sq : c.squares)
    if (sq.name == name) return &sq;
  return nullptr;
}

}  // namespace

TEST_CASE("exact rational arithmetic") {
  CHECK(Rational(1, 2) + Rational(1, 3) == Rational(5, 6));
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(1, -2) == Rational(-1, 2));
  CHECK(Rational(3, 4) * Rational(2, 3) == Rational(1, 2));
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK(Rational(-7).sign() == -1);
  CHECK_THROWS_AS(Rational(1, 0), std::domain_error);
  // products that cannot be reduced back into 64 bits must be detected
  const Rational big(1, 3037000499);  // den^2 is just inside int64
  CHECK_NOTHROW(big * big);
  CHECK_THROWS_AS(big * big * Rational(1, 3), std::overflow_error);

  CHECK(Rational::exact_sqrt(Rational(9, 4)) == Rational(3, 2));
  CHECK(Rational::exact_sqrt(Rational(0)) == Rational(0));
  CHECK(!Rational::exact_sqrt(Rational(2)).has_value());
  CHECK(!Rational::exact_sqrt(Rational(-1)).has_value());
}

TEST_CASE("exact arithmetic in Q(sqrt 2)") {
  const Surd2 root2 = Surd2::sqrt2();
  CHECK(root2 * root2 == Surd2(2));
  CHECK(Surd2(1) / (Surd2(3) + Surd2(2) * root2) == Surd2(3) - Surd2(2) * root2);
  CHECK((Surd2(1) + root2).sign() == 1);
  CHECK((Surd2(1) - root2).sign() == -1);
  CHECK((Surd2(3) - Surd2(2) * root2).sign() == 1);
  CHECK((Surd2(Rational(0), Rational(1, 2)) * Surd2(Rational(0), Rational(1, 2))) ==
        Surd2(Rational(1, 2)));

  CHECK(Surd2::exact_sqrt(Surd2(3) + Surd2(2) * root2) == Surd2(1) + root2);
  CHECK(Surd2::exact_sqrt(Surd2(2)) == root2);
  CHECK(Surd2::exact_sqrt(Surd2(Rational(1, 2))) == Surd2(Rational(0), Rational(1, 2)));
  CHECK(!Surd2::exact_sqrt(Surd2(2) - root2).has_value());
  CHECK(!Surd2::exact_sqrt(-Surd2(1)).has_value());
  CHECK(std::abs((Surd2(3) - root2).to_double() - (3 - std::sqrt(2.0))) < 1e-15);
}

TEST_CASE("local tangent operator coefficients") {
  const auto t_half = local_tangent_target(kPi / 2, 0.0);
  CHECK(std::abs(t_half.coefficient(Monomial::parse("A1", 3))) < 1e-15);
  CHECK(t_half.coefficient(Monomial::parse("A1*B1*C1", 3)) == doctest::Approx(-0.5));
  CHECK(t_half.coefficient(Monomial::identity(3)) == doctest::Approx(2.0));

  const auto t_quarter = local_tangent_target(kPi / 4, 0.0);
  CHECK(t_quarter.coefficient(Monomial::identity(3)) ==
        doctest::Approx(1 + 1 / std::sqrt(2.0)).epsilon(1e-14));

  // swapping the second and third party is a symmetry of the family
  const auto t = local_tangent_target(1.1, 2.3);
  CHECK(swap_parties(t, 1, 2) == t);

  CHECK_THROWS_AS(local_tangent_target(0.6, 0.0), std::domain_error);
  CHECK_THROWS_AS(local_tangent_target(1.8, 0.0), std::domain_error);
}

TEST_CASE("local certificate coefficients at the closed-form point") {
  const auto cert = local_sos_certificate(kPi / 2, 0.0);
  REQUIRE(cert.squares.size() == 4);
  // layouts: (alpha, beta, -beta, -alpha), (gamma, -delta),
  //          (beta, alpha, alpha, beta), (delta, gamma)
  CHECK(cert.squares[0].coefficients[0] == doctest::Approx(0.0));
  CHECK(cert.squares[0].coefficients[1] ==
        doctest::Approx(std::sqrt(2.0) / 4).epsilon(1e-14));  // 0.35355...
  CHECK(cert.squares[1].coefficients[0] == doctest::Approx(0.25));   // gamma
  CHECK(cert.squares[3].coefficients[0] == doctest::Approx(-0.25));  // delta

  // interior point: the coefficient identities are asserted by construction
  CHECK_NOTHROW(local_sos_certificate(kPi / 3, kPi / 5));
  // boundary theta = pi/4: radicand -cos(2 theta) hits zero, all finite
  for (double phi : {0.0, 0.9, 2.4, 4.4, 6.1}) {
    const auto boundary = local_sos_certificate(kPi / 4, phi);
    for (const auto& sq : boundary.squares)
      for (double c : sq.coefficients) CHECK(std::isfinite(c));
  }
  CHECK_THROWS_AS(local_sos_certificate(0.2, 1.0), std::domain_error);
}

TEST_CASE("square-sum expansion on handmade certificates") {
  SosCertificate unit;
  unit.squares = {{"Q", {1.0}, {OperatorPolynomial::constant(3, 1.0)}}};
  CHECK(expand_square_sum(unit) == OperatorPolynomial::constant(3, 1.0));

  // (A1 + B1)^2 = 2 + 2 A1B1
  const auto a1 = OperatorPolynomial::from_monomial(Monomial::parse("A1", 3), 1.0);
  const auto b1 = OperatorPolynomial::from_monomial(Monomial::parse("B1", 3), 1.0);
  SosCertificate pair;
  pair.squares = {{"Q", {1.0, 1.0}, {a1, b1}}};
  auto expected = OperatorPolynomial::constant(3, 2.0);
  expected.add_term(Monomial::parse("A1*B1", 3), 2.0);
  CHECK(expand_square_sum(pair) == expected);

  SosCertificate bad;
  bad.squares = {{"Q", {1.0, 2.0}, {a1}}};
  CHECK_THROWS_AS(expand_square_sum(bad), std::invalid_argument);
}

TEST_CASE("local certificate closes on the target across the parameter grid") {
  for (int i = 0; i < 20; ++i) {
    const double theta = kPi / 4 + (kPi / 4) * i / 19.0;
    for (int j = 0; j < 20; ++j) {
      const double phi = 2 * kPi * j / 20.0;
      const auto cert = local_sos_certificate(theta, phi);
      const auto target = local_tangent_target(theta, phi);
      CHECK(verify(cert, target) <= 1e-10);
    }
  }
}

TEST_CASE("tangency: the optimal strategy annihilates the target operator") {
  for (int i = 0; i < 20; ++i) {
    const double theta = kPi / 4 + (kPi / 4) * i / 19.0;
    const double phi = 2 * kPi * ((i * 7) % 20) / 20.0;
    const auto target = local_tangent_target(theta, phi);
    const auto b = behavior(local_tangent_strategy(theta, phi));
    CHECK(std::abs(evaluate_on_behavior(target, b)) <= 1e-10);
  }
}

TEST_CASE("deterministic-A1 strategy attains the boundary tangent") {
  for (double phi : {0.0, 0.7, 2.1, kPi, 5.2}) {
    const auto target = local_tangent_target(kPi / 4, phi);
    const auto b = behavior(linearisation_violator_strategy(phi));
    CHECK(std::abs(evaluate_on_behavior(target, b)) <= 1e-10);
  }
  // at theta = pi/4 the bound's right-hand side collapses to cos t + sqrt2 sin t
  CHECK(1 + std::sin(kPi / 4) ==
        doctest::Approx(std::cos(kPi / 4) + std::sqrt(2.0) * std::sin(kPi / 4)));
}

TEST_CASE("two-party target structure") {
  // lambda = mu: the A1/B1 terms drop out and the inequality is M <= 4
  const auto t_eq = two_party_target(0.5, 0.5);
  CHECK(t_eq.coefficient(Monomial::parse("A1", 3)) == 0.0);
  CHECK(t_eq.coefficient(Monomial::parse("A1*B1", 3)) == 0.0);
  CHECK(t_eq.coefficient(Monomial::identity(3)) == doctest::Approx(4.0));
  CHECK(t_eq.coefficient(Monomial::parse("A1*B1*C1", 3)) == doctest::Approx(-1.0));

  // lambda = 3 mu: alpha == beta, so T encodes 4 P_AB(++|11) + M <= 6
  const auto t_top = two_party_target(1.2, 0.4);
  const double alpha = 4 * 1.2 * 0.4;
  CHECK(t_top.coefficient(Monomial::parse("A1", 3)) == doctest::Approx(-alpha));
  CHECK(t_top.coefficient(Monomial::parse("A1*B1*C1", 3)) == doctest::Approx(-alpha));

  // alpha = 4 lambda mu = 1 at the point lambda = sqrt(3)/2, mu = 1/(2 sqrt 3)
  const auto t_one = two_party_target(std::sqrt(3.0) / 2, 0.5 / std::sqrt(3.0));
  CHECK(t_one.coefficient(Monomial::parse("A1*B1*C1", 3)) == doctest::Approx(-1.0));

  CHECK_THROWS_AS(two_party_target(0.3, 0.4), std::domain_error);
  CHECK_THROWS_AS(two_party_target(1.3, 0.4), std::domain_error);
  CHECK_THROWS_AS(two_party_target(0.4, -0.1), std::domain_error);
}

TEST_CASE("two-party certificate closes on the target along the cone") {
  for (int i = 0; i < 20; ++i) {
    const double ratio = 1 + 2.0 * i / 19.0;  // lambda / mu in [1, 3]
    const double mu = 1 / std::sqrt(ratio * ratio + 3);
    const double lambda = ratio * mu;
    const auto cert = two_party_sos_certificate(lambda, mu);
    REQUIRE(cert.squares.size() == 9);
    CHECK(verify(cert, two_party_target(lambda, mu)) <= 1e-10);
  }
  // identity is homogeneous: unnormalized parameters verify equally well
  CHECK(verify(two_party_sos_certificate(0.75, 0.4), two_party_target(0.75, 0.4)) <= 1e-10);
}

TEST_CASE("boundary squares degenerate to explicit zeros") {
  const auto at_mu = two_party_sos_certificate(0.5, 0.5);
  for (const char* name : {"P++2", "P+-2", "P--1", "P--3"}) {
    const auto* sq = find_square(at_mu, name);
    REQUIRE(sq != nullptr);
    CHECK(sq->expand().size() == 0);
  }
  CHECK(find_square(at_mu, "P-+1")->expand().size() > 0);

  // 0.75 = 3 * 0.25 exactly in binary, so the prefactors vanish identically
  const auto at_3mu = two_party_sos_certificate(0.75, 0.25);
  for (const char* name : {"P++1", "P++2", "P-+2"}) {
    const auto* sq = find_square(at_3mu, name);
    REQUIRE(sq != nullptr);
    CHECK(sq->expand().size() == 0);
  }
  CHECK(find_square(at_3mu, "P++4")->expand().size() > 0);
}

TEST_CASE("certificate symmetries") {
  // local family: B <-> C relabeling fixes target and expansion
  const auto cert = local_sos_certificate(1.0, 0.5);
  const auto expanded = expand_square_sum(cert);
  CHECK(max_coeff_diff(swap_parties(expanded, 1, 2), expanded) <= 1e-10);

  // two-party family: A <-> B swap and global sign flip of setting-2
  // observables both fix the target and the expansion
  const auto t = two_party_target(0.8, 0.35);
  CHECK(swap_parties(t, 0, 1) == t);
  CHECK(flip_setting2(t) == t);
  const auto expanded2 = expand_square_sum(two_party_sos_certificate(0.8, 0.35));
  CHECK(max_coeff_diff(swap_parties(expanded2, 0, 1), expanded2) <= 1e-10);
  CHECK(max_coeff_diff(flip_setting2(expanded2), expanded2) <= 1e-10);
}

TEST_CASE("a corrupted coefficient is detected") {
  const auto cert = local_sos_certificate(1.0, 0.5);
  const auto target = local_tangent_target(1.0, 0.5);
  REQUIRE(verify(cert, target) <= 1e-10);

  const auto bad = with_corrupted_coefficient(cert, 0, 1, 1e-3);
  const auto report = verify_report(bad, target);
  CHECK(report.residual >= 9e-4);
  CHECK(report.residual == verify(bad, target));
  CHECK(std::abs(expand_square_sum(bad).coefficient(report.worst_monomial) -
                 target.coefficient(report.worst_monomial)) ==
        doctest::Approx(report.residual));

  CHECK_THROWS_AS(with_corrupted_coefficient(cert, 9, 0, 1e-3), std::out_of_range);
  CHECK_THROWS_AS(with_corrupted_coefficient(cert, 0, 40, 1e-3), std::out_of_range);

  const auto two = two_party_sos_certificate(0.8, 0.35);
  const auto bad2 = with_corrupted_coefficient(two, 5, 0, 1e-3);
  CHECK(verify(bad2, two_party_target(0.8, 0.35)) >= 9e-4);
}

TEST_CASE("exact verification at the surd anchors") {
  for (auto theta : {AnchorTheta::QuarterPi, AnchorTheta::HalfPi})
    for (auto phi : {AnchorPhi::Zero, AnchorPhi::HalfPi}) {
      const auto check = local_sos_exact_check(theta, phi);
      INFO("mismatch: ", check.mismatch);
      CHECK(check.match);
      CHECK(check.mismatch.empty());
    }
}
