#pragma once

// Sum-of-squares certificates for the tangent-operator inequalities behind
// the guessing-probability curves.
//
// Local (one-party) family, parameters theta in [pi/4, pi/2] and phi:
//   T = (1 + sin t)*1 - cos t * A1 - (sin t / 2)(cos p * M + sin p * M')
// is certified nonnegative by four squares P+1, P+2, P-1, P-2 with
// coefficient layouts (alpha, beta, -beta, -alpha), (gamma, -delta),
// (beta, alpha, alpha, beta), (delta, gamma) over short Hermitian operators.
//
// Two-party family, parameters 3*mu >= lambda >= mu > 0:
//   T = gamma*1 - beta (A1 + B1 + A1B1) - alpha * M
// with alpha = 4*lambda*mu, beta = (lambda-mu)(lambda+3mu),
// gamma = (3lambda+mu)(lambda+3mu), certified by nine squares.  The identity
// is homogeneous of degree two in (lambda, mu), so no normalization is
// required.  Squares whose prefactor vanishes on the cone boundary are kept
// as explicit zero rows to make the nine-term structure stable.
//
// Squares are stored factored, P_i = sum_j c_ij R_ij, and expansion runs over
// pairwise products R_ij R_ik.  Only quadratic coefficient products c_ij c_ik
// enter the expansion, and at theta in {pi/4, pi/2}, phi in {0, pi/2} every
// such product lies in Q(sqrt 2) (even where individual coefficients do not),
// so the local identity is additionally checked there in exact arithmetic.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "dirk/bell_algebra.hpp"
#include "dirk/rational_surd.hpp"

namespace dirk {

using OperatorPolynomial = BellExpression;

struct FactoredSquare {
  std::string name;                       // "P+1", "P++3", ...
  std::vector<double> coefficients;       // c_j
  std::vector<OperatorPolynomial> basis;  // R_j, Hermitian, same length
  OperatorPolynomial expand() const;      // sum_j c_j R_j
};

struct SosCertificate {
  std::vector<FactoredSquare> squares;
  std::map<std::string, double> params;  // {"theta","phi"} or {"lambda","mu"}
};

// ---- local (one-party) family ---------------------------------------------

OperatorPolynomial local_tangent_target(double theta, double phi);
// Throws std::domain_error for theta outside [pi/4, pi/2]; the constructor
// re-checks the two coefficient identities that make the expansion close
// (residuals <= 1e-12) and throws std::logic_error if they fail.
SosCertificate local_sos_certificate(double theta, double phi);

// ---- two-party family ------------------------------------------------------

OperatorPolynomial two_party_target(double lambda, double mu);
SosCertificate two_party_sos_certificate(double lambda, double mu);

// ---- verification ----------------------------------------------------------

// Sum of P_i^2, expanded in the monomial algebra with compensated summation.
OperatorPolynomial expand_square_sum(const SosCertificate& c);

struct VerifyReport {
  double residual = 0.0;    // max |coefficient difference| vs the target
  Monomial worst_monomial;  // where the maximum is attained
};
VerifyReport verify_report(const SosCertificate& c, const OperatorPolynomial& target);
double verify(const SosCertificate& c, const OperatorPolynomial& target);

// Adds delta to one stored coefficient (fault injection for detector tests).
SosCertificate with_corrupted_coefficient(SosCertificate c, std::size_t square,
                                          std::size_t term, double delta);

// ---- exact checks at closed-form parameter points ---------------------------

enum class AnchorTheta { QuarterPi, HalfPi };
enum class AnchorPhi { Zero, HalfPi };

struct ExactCheck {
  bool match = false;
  std::string mismatch;  // empty on success, else offending monomial and values
};
// Establishes sum_i P_i^2 == T over Q(sqrt 2) at the given anchor point.
ExactCheck local_sos_exact_check(AnchorTheta theta, AnchorPhi phi);

}  // namespace dirk
