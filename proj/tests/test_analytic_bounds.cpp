#include "dirk/analytic_bounds.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

using namespace dirk;

namespace {
constexpr double kSqrt2 = std::numbers::sqrt2;
}

TEST_CASE("trade-off curve endpoints and branch point") {
  CHECK(f_curve(4.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(f_curve(2 * kSqrt2) == doctest::Approx(1.0).epsilon(1e-14));
  // continuity: both branch formulas meet at x = 2+√2
  double x = 2 + kSqrt2;
  double linear = 1 + 1 / kSqrt2 - x / 4;
  double nonlinear = 0.5 + 0.5 * std::sqrt(x * (1 - x / 4));
  CHECK(std::abs(linear - nonlinear) < 1e-12);
  CHECK(f_curve(x) == doctest::Approx(0.8535533906).epsilon(1e-9));
  CHECK_THROWS(f_curve(2.0));
  CHECK_THROWS(f_curve(4.1));
  // monotone nonincreasing
  double prev = 2.0;
  for (int i = 0; i <= 400; ++i) {
    double v = f_curve(2 * kSqrt2 + (4 - 2 * kSqrt2) * i / 400.0);
    CHECK(v <= prev + 1e-12);
    prev = v;
  }
}

TEST_CASE("one-party bound depends only on the correlator radius") {
  CHECK(local_gp_bound(4, 0).clamped == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(local_gp_bound(0, 4).clamped == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(local_gp_bound(2, 2).raw == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(local_gp_bound(1, 0).raw == 1.0);  // vacuous below 2√2
  CHECK_THROWS(local_gp_bound(4, 1));      // radius > 4

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> r(2 * kSqrt2, 4.0), ang(0, 2 * std::numbers::pi);
  for (int i = 0; i < 200; ++i) {
    double radius = r(rng), a = ang(rng);
    double v1 = local_gp_bound(radius, 0).raw;
    double v2 = local_gp_bound(radius * std::cos(a), radius * std::sin(a)).raw;
    CHECK(v1 == doctest::Approx(v2).epsilon(1e-12));
  }
}

TEST_CASE("hybrid combination bound is f(M+/sqrt(2))") {
  CHECK(svetlichny_local_bound(4 * kSqrt2).clamped == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(svetlichny_local_bound(4.0).raw == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(svetlichny_local_bound((2 + kSqrt2) * kSqrt2).raw ==
        doctest::Approx(0.8535533906).epsilon(1e-9));
  CHECK_THROWS(svetlichny_local_bound(3.0));
}

TEST_CASE("bipartite reference bound") {
  CHECK(chsh_gp_bound(2 * kSqrt2).clamped == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(chsh_gp_bound(2.0).raw == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(chsh_gp_bound(2.5).raw ==
        doctest::Approx(0.5 + 0.5 * std::sqrt(2 - 2.5 * 2.5 / 4)).epsilon(1e-14));
  CHECK_THROWS(chsh_gp_bound(1.9));
}

TEST_CASE("two-party bound branches meet at M = 3 with matched slope") {
  CHECK(two_party_gp_bound(4.0).clamped == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(two_party_gp_bound(2.0).raw == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(two_party_gp_bound(3.0).raw == doctest::Approx(0.75).epsilon(1e-14));
  double left = 1.5 - 3.0 / 4;
  double right = 0.75 - 3.0 / 8 + std::sqrt(3.0) * std::sqrt((3.0 / 8) * (0.5 - 3.0 / 8));
  CHECK(std::abs(left - right) < 1e-12);
  // slope match at the junction (linear slope is -1/4)
  double h = 1e-6;
  double slope = (two_party_gp_bound(3 + h).raw - two_party_gp_bound(3.0).raw) / h;
  CHECK(slope == doctest::Approx(-0.25).epsilon(1e-4));
  CHECK_THROWS(two_party_gp_bound(1.0));

  double prev = 2.0;
  for (int i = 0; i <= 400; ++i) {
    double v = two_party_gp_bound(2 + 2.0 * i / 400).raw;
    CHECK(v <= prev + 1e-12);
    prev = v;
  }
}

TEST_CASE("no-signalling closed forms at the achievable points") {
  CHECK(ns_local_bound(4, 4).clamped == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(ns_local_bound(4, 0).clamped == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ns_local_bound(0, 0).raw == doctest::Approx(1.5));
  CHECK(ns_local_bound(0, 0).clamped == 1.0);
  CHECK(ns_local_bound(-4, -4).clamped == doctest::Approx(0.5));  // |.| symmetry

  CHECK(ns_two_party_bound(4, 4).clamped == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(ns_two_party_bound(2, 4).clamped == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(ns_two_party_bound(2, 2).clamped == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ns_two_party_bound(4, 2).clamped == doctest::Approx(0.5).epsilon(1e-14));

  CHECK(ns_global_bound(4, 4).clamped == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(ns_global_bound(4, 2).clamped == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(ns_global_bound(0, 4).clamped == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(ns_global_bound(2, 2).clamped == doctest::Approx(1.0));

  // swapped variant exchanges the roles of M and M'
  CHECK(ns_global_bound(0, 4, true).raw == doctest::Approx(ns_global_bound(4, 0).raw));

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-4, 4);
  for (int i = 0; i < 200; ++i) {
    double m = u(rng), mp = u(rng);
    CHECK(ns_two_party_bound(m, mp).raw ==
          doctest::Approx(ns_two_party_bound(mp, m).raw).epsilon(1e-14));
    // the one-party NS bound always dominates the two-party one
    CHECK(ns_local_bound(m, mp).raw >= ns_two_party_bound(m, mp).raw - 1e-14);
  }
}

TEST_CASE("n-party constants and bound") {
  NPartyParams p3 = nparty_params(3);
  CHECK(p3.local_bound == 2.0);
  CHECK(p3.quantum_bound == 4.0);
  CHECK(p3.threshold == doctest::Approx(3.0).epsilon(1e-14));

  NPartyParams p4 = nparty_params(4);
  CHECK(p4.local_bound == 4.0);
  CHECK(p4.quantum_bound == 8.0);
  CHECK(p4.threshold == doctest::Approx(7.0).epsilon(1e-14));
  CHECK(nparty_bound(4, 7.0).raw == doctest::Approx(7.0 / 16).epsilon(1e-14));
  CHECK(nparty_bound(4, 4.0).raw == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(nparty_bound(4, 8.0).raw == doctest::Approx(1.0 / 8).epsilon(1e-14));

  NPartyParams p5 = nparty_params(5);
  CHECK(p5.threshold == doctest::Approx((p5.local_bound + p5.quantum_bound) / 2));
  CHECK(p5.threshold == doctest::Approx(10.0));
  CHECK(nparty_bound(5, 10.0).raw == doctest::Approx(15.0 / 24).epsilon(1e-12));

  CHECK_THROWS(nparty_params(2));
  CHECK_THROWS(nparty_bound(4, 3.0));
  CHECK_THROWS(nparty_bound(4, 9.0));

  // n = 3 reproduces the two-party curve pointwise
  for (int i = 0; i <= 200; ++i) {
    double m = 2 + 2.0 * i / 200;
    CHECK(std::abs(nparty_bound(3, m).raw - two_party_gp_bound(m).raw) < 1e-12);
  }

  // branch continuity and slope match at the threshold
  for (int n : {3, 4, 5}) {
    NPartyParams p = nparty_params(n);
    const double l = p.local_bound, q = p.quantum_bound, t = p.threshold;
    double gamma = (l * (q - 1) - (l - 1) * t) / (l * (q - l));
    double curve = 1 - 1 / q - (q - 2) / (q * q) * t +
                   2 * std::sqrt(q - 1) / (q * q) * std::sqrt(t * (q - t));
    CHECK(std::abs(gamma - curve) < 1e-12);
    double h = 1e-7 * q;
    double slope = (nparty_bound(n, t + h).raw - nparty_bound(n, t).raw) / h;
    CHECK(slope == doctest::Approx(-(l - 1) / (l * (q - l))).epsilon(1e-4));
    // monotone nonincreasing across the whole domain
    double prev = 2.0;
    for (int i = 0; i <= 300; ++i) {
      double v = nparty_bound(n, l + (q - l) * i / 300.0).raw;
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("settings-222 maximisation hits 1/8 at maximal violation") {
  double at4 = global222_conjecture(4.0);
  CHECK(at4 == doctest::Approx(0.125).epsilon(1e-5));
  double at2 = global222_conjecture(2.0);
  CHECK(at2 <= 1.0 + 1e-9);
  CHECK(at2 >= at4 - 1e-9);
  double prev = at2;
  for (double m : {2.5, 3.0, 3.5, 4.0}) {
    double v = global222_conjecture(m);
    CHECK(v <= prev + 1e-6);
    prev = v;
  }
}

TEST_CASE("settings-222 maximisation matches frozen dense-grid values") {
  // oracle: independent 600x1200 grid search over (alpha, theta2, sign) with
  // local refinement, run once and frozen here
  struct Point { double m, value; };
  for (auto [m, value] : {Point{2.2, 0.9453125}, {2.8, 0.7562500},
                          {3.4, 0.5273242}, {3.8, 0.3277761}}) {
    CHECK(global222_conjecture(m) == doctest::Approx(value).epsilon(5e-6));
  }
}
