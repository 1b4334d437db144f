#pragma once

// Dense simulation of n-qubit pure-state strategies with two ±1-valued
// projective measurements per party, plus the named strategy families used by
// the bound-attainment arguments.
//
// Basis conventions: computational basis |1>, |2>; party 0 is the most
// significant qubit of the state index; |±> = (|1> ± |2>)/√2 are the σx
// eigenstates.  Observables may be any Hermitian involution, including ±1
// (deterministic outcomes).

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dirk/behavior.hpp"
#include "dirk/bell_algebra.hpp"

namespace dirk {

using QubitObservable = Eigen::Matrix2cd;  // Hermitian, squares to identity

QubitObservable sigma_x();
QubitObservable sigma_y();
QubitObservable sigma_z();
// cx·σx + cy·σy; requires cx² + cy² = 1
QubitObservable xy_observable(double cx, double cy);
QubitObservable identity_observable(double sign);  // ±1

struct QuantumStrategy {
  int n = 0;
  Eigen::VectorXcd state;                                  // dimension 2^n
  std::vector<std::array<QubitObservable, 2>> observables; // per party: setting 1, 2

  void validate() const;  // normalization + observable invariants (1e-12)
  std::string to_json() const;
  static QuantumStrategy from_json(const std::string& text);
};

// <Ψ| O |Ψ> (real part).  Monomials with within-party degree > 1 are evaluated
// as operator products.
double expectation(const QuantumStrategy& s, const Monomial& m);
double expectation(const QuantumStrategy& s, const BellExpression& e);

// Full conditional probability table from projectors (1 ± observable)/2.
Behavior behavior(const QuantumStrategy& s);

// Attained P(first k parties all output '+' | every setting 1), 0 ≤ k ≤ n.
double prefix_plus_probability(const QuantumStrategy& s, int k);

// ---- named strategy families ----------------------------------------------

// (|1...1> + |2...2>)/√2 with σx/σy everywhere; maximal n-party violation.
QuantumStrategy ghz_strategy(int n_parties = 3);

// Tangent strategy for the one-party linearised bound, π/4 ≤ θ ≤ π/2:
//   state  cos(θ/2)(|+++> + |+-->)/√2 + sin(θ/2)(|-+-> + |--+>)/√2,
//   A₁ = B₁ = σx, A₂ = B₂ = σy, C₁ = cos(φ)σx − sin(φ)σy,
//   C₂ = sin(φ)σx + cos(φ)σy.
// Contract: <A₁> = cos θ, cos(φ)M + sin(φ)M′ = 2(1 + sin θ).
QuantumStrategy local_tangent_strategy(double theta, double phi);

// Deterministic Alice (A₁ = +1, A₂ = −1) with a maximally CHSH-violating
// B/C pair.  Contract: <A₁> = 1, cos(φ)M + sin(φ)M′ = 2√2.
QuantumStrategy linearisation_violator_strategy(double phi);

// λ|+++> + μ(|+--> + |-+-> + |--+>) with σx/σy everywhere ((λ, μ) rescaled to
// λ² + 3μ² = 1).  Contract: P_AB(++|11) = λ², M = (λ + 3μ)².
QuantumStrategy two_party_strategy(double lambda, double mu);

// n-party generalization: λ|+>^n + μ Σ_s |s> over sign vectors s with a
// nonzero even number of minuses ((λ, μ) rescaled to λ² + (2^{n-1} − 1)μ² = 1).
// Contract: P(+...+ on first n−1 parties | settings 1) = λ²,
//           M_n = (λ + (2^{n-1} − 1)μ)².
QuantumStrategy nparty_strategy(int n_parties, double lambda, double mu);

// Product strategy with deterministic ±1 observables.
QuantumStrategy deterministic_strategy(const std::vector<std::array<int, 2>>& signs);

// Deterministic endpoint of the two-party trade-off's linear branch:
// a = (+,+), b = (+,+), c = (+,−) ⇒ M = 2, P_AB(++|11) = 1.
QuantumStrategy two_party_linear_endpoint();

// Deterministic strategy attaining the n-party local bound L_n with all-'+'
// outcomes on setting 1: A₁ = +1 everywhere, A₂ = +1 on ⌈n/2⌉ parties.
QuantumStrategy nparty_linear_endpoint(int n_parties);

// String-keyed factory used by the CLI; kinds: "ghz", "local_tangent",
// "linearisation_violator", "two_party", "nparty".
QuantumStrategy make_strategy(const std::string& kind, int n_parties,
                              double theta, double phi, double lambda, double mu);

}  // namespace dirk
