#pragma once

// Closed-form guessing-probability bounds for the tripartite two-setting
// scenario (quantum and no-signalling), their n-party generalization, and the
// numeric maximisation backing the conjectured global bound at settings 222.

#include <string>

namespace dirk {

struct BoundValue {
  double raw = 0.0;      // formula value, may exceed 1 at weak violations
  double clamped = 0.0;  // min(raw, 1)
  double floor = 0.0;    // trivial guessing probability 1/2^k of the scenario
};

// Trade-off curve between a correlator value x in [2√2, 4] and the maximal
// single-outcome guessing probability:
//   f(x) = 1 + 1/√2 − x/4                 for x ≤ 2+√2   (linear)
//   f(x) = 1/2 + (1/2)√(x(1 − x/4))       for x ≥ 2+√2   (nonlinear)
double f_curve(double x);

// P_g(A₁|E) ≤ f(√(M² + M′²)); raw = 1 when the radius is below 2√2.
BoundValue local_gp_bound(double m, double m_prime);

// P_g(A₁|E) ≤ f(M₊/√2) for the hybrid combination M₊ = M + M′ in [4, 4√2].
BoundValue svetlichny_local_bound(double m_plus);

// Bipartite reference curve: P_g(A₁|E) ≤ 1/2 + (1/2)√(2 − S²/4), S in [2, 2√2].
BoundValue chsh_gp_bound(double s);

// P_g(A₁B₁|E) (equally P_g(A₁B₁C₁|E)) against M in [2, 4]:
//   3/2 − M/4                                  for M ≤ 3
//   3/4 − M/8 + √3·√((M/8)(1/2 − M/8))         for M ≥ 3
BoundValue two_party_gp_bound(double m);

// No-signalling bounds (raw values may exceed 1; |M|, |M′| ≤ 4):
//   one party:   3/2 − |M|/8 − |M′|/8
//   two parties: min{3/2−|M|/4, 7/4−|M|/4−|M′|/8} and the same with M ↔ M′
//   global:      min{3/2−|M|/4, 7/4−|M|/4−|M′|/8, 7/4−|M|/16−5|M′|/16};
//                `swapped` exchanges M and M′ (settings-222 target)
BoundValue ns_local_bound(double m, double m_prime);
BoundValue ns_two_party_bound(double m, double m_prime);
BoundValue ns_global_bound(double m, double m_prime, bool swapped = false);

// Tight envelope for the global case: the three-inequality set of
// ns_global_bound plus the setting-swap facet 3/2 − |M′|/4, which binds for
// |M| < 2, |M′| > 2.  Coincides with the exact guessing LP over the whole
// square (the plain three-bound minimum is loose in that corner).
BoundValue ns_global_envelope(double m, double m_prime, bool swapped = false);

// n-party scenario constants.
struct NPartyParams {
  int n = 0;
  double local_bound = 0.0;    // L_n = 2^{(n-1)/2} (odd n), 2^{n/2} (even n)
  double quantum_bound = 0.0;  // Q_n = 2^{n-1}
  double threshold = 0.0;      // M_th = L²(Q−1)/(L²−2L+Q); (L+Q)/2 for odd n
};
NPartyParams nparty_params(int n);

// Conjectured guessing bound for n-party outcomes against M_n in [L_n, Q_n]:
// linear interpolation Γ_n below M_th, curve P_n above,
//   P_n(M) = 1 − 1/Q − ((Q−2)/Q²)M + (2√(Q−1)/Q²)√(M(Q−M)),
//   Γ_n(M) = (L(Q−1) − (L−1)M)/(L(Q−L)).
BoundValue nparty_bound(int n, double m);

// Numeric maximisation for P_g(A₂B₂C₂|E): maximize
//   (1/8)(1 + 24cos(3θ₂/2)αβ + 2cos(3θ₂)α² + 30β²)
// over 2α²+6β²=1 and θ₁, θ₂ subject to
//   M = (2cos3θ₁ − 6cos(θ₁+2θ₂))α² − 12cos(θ₁−θ₂)β².
// Per-θ₂ slices are maximised exactly (the objective is a single sinusoid in
// the normalisation angle; feasibility boundaries come from 1-D root
// finding), then θ₂ is scanned and polished. Deterministic for a fixed
// config.
struct Global222Config {
  int angle_points = 48;      // θ₂ scan density is 8× this on [0, π]
  int alpha_points = 64;      // retained for config stability; unused
  double refine_step = 1e-9;  // θ₂ polish bracket width (capped at 1e-10)
};
double global222_conjecture(double m, const Global222Config& config = {});

}  // namespace dirk
