#pragma once

// No-signalling analysis: marginal-consistency checks, local-polytope
// membership, guessing-probability LPs over no-signalling eavesdroppers, and
// the steering / hidden-variable constructions behind the secret-sharing
// attack demo.

#include <string>
#include <vector>

#include "dirk/behavior.hpp"
#include "dirk/bell_algebra.hpp"
#include "dirk/npa.hpp"

namespace dirk {

// ---- no-signalling check ----------------------------------------------------

struct SignallingViolation {
  std::string description;  // which marginal moves with which remote setting
  double magnitude = 0.0;   // largest deviation found for that marginal
};

// Empty iff every marginal obtained by summing out one party is independent
// of that party's setting (within tol).  This one-party condition implies
// consistency of all smaller marginals.
std::vector<SignallingViolation> check_no_signalling(const Behavior& b,
                                                     double tol = 1e-10);

// ---- conditioning -----------------------------------------------------------

// P(rest | settings; outcome, setting of `party`) = P(all)/P_party(outcome).
// Well-defined independently of the remote settings when b is no-signalling;
// the remote settings actually used are irrelevant for the division.  Throws
// std::domain_error when P_party(outcome | setting) vanishes.
Behavior conditional_behavior(const Behavior& b, int party, int outcome,
                              int setting);

// ---- local polytope membership (2 parties, 2 settings, 2 outcomes) ----------

// Deterministic bipartite behavior: a_map/b_map give each party's outcome
// (0 = '+', 1 = '-') as a function of its setting, bit s-1 of the map.
Behavior deterministic_bipartite(int a_map, int b_map);

struct LocalityCertificate {
  bool local = false;
  double distance = 0.0;         // l1 gap of the best decomposition
  std::vector<double> weights;   // 16 vertex weights, index a_map*4 + b_map
};

// LP membership in the convex hull of the 16 deterministic vertices:
// minimize the l1 mismatch of V·w against the table with Σw = 1, w ≥ 0.
// local iff the mismatch is ≤ tol.
LocalityCertificate is_local_bipartite(const Behavior& b, double tol = 1e-9);

// ---- no-signalling guessing probability -------------------------------------

// Maximal probability that a no-signalling eavesdropper holding a physical
// system correlated with the devices guesses the guessed parties' outcomes,
// given pinned Bell expectation values.  LP over Eve-outcome-indexed
// subnormalized no-signalling blocks (parameterized by their correlators, so
// no-signalling is structural) summing to total weight 1.
// Throws std::domain_error when the pinned values are not reachable by any
// no-signalling behavior, std::invalid_argument on malformed input.
double gp_ns_bound(const GuessingScenario& sc,
                   const std::vector<PinnedExpression>& pins,
                   double tol = 1e-9);

// ---- steering extension -----------------------------------------------------

// Convex decomposition of a bipartite no-signalling behavior.
struct NsDecomposition {
  std::vector<double> weights;      // ≥ 0, sum to 1
  std::vector<Behavior> components; // bipartite, no-signalling
};

// Appends an extra setting ⊥ to `party` (index n_settings+1): on ⊥ the party
// outputs the component index c of the decomposition with probability
// weights[c] and steers the others into components[c].  Requires the mixture
// to reproduce the bipartite marginal of b (within 1e-10); the result agrees
// with b on every original setting and passes check_no_signalling.
Behavior steering_extension(const Behavior& b, const NsDecomposition& d,
                            int party = 2);

// ---- secret-sharing attack demo ----------------------------------------------

// Demonstration that the GHZ-paradox correlations admit a setting-dependent
// hidden-variable model, so a dishonest third party can reproduce them
// classically: every conditional bipartite behavior P(ab|xy; c,z) is local,
// the per-(c,z) certificates assemble into an explicit model, and the
// Alice-Bob marginal itself is local (enabling arbitrary no-signalling
// steering).  Returns a JSON report with the certificates, the model, its
// reconstruction error, and a steering-extension example.
std::string hbb_attack_report();

}  // namespace dirk
