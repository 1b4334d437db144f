#include "dirk/quantum_sim.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

namespace dirk {

namespace {

using Eigen::Matrix2cd;
using Eigen::VectorXcd;
using std::complex;

constexpr complex<double> I{0.0, 1.0};

void check_contract(bool ok, const char* what) {
  if (!ok) throw std::logic_error(std::string("strategy contract violated: ") + what);
}

// Applies a single-qubit operator to the given party (party 0 = MSB).
VectorXcd apply_single(const Matrix2cd& op, int party, int n, const VectorXcd& v) {
  VectorXcd out(v.size());
  const int shift = n - 1 - party;
  const long long bit = 1ll << shift;
  for (long long i = 0; i < v.size(); ++i) {
    long long i0 = i & ~bit, i1 = i | bit;
    out[i] = ((i & bit) == 0) ? op(0, 0) * v[i0] + op(0, 1) * v[i1]
                              : op(1, 0) * v[i0] + op(1, 1) * v[i1];
  }
  return out;
}

VectorXcd apply_monomial(const QuantumStrategy& s, const Monomial& m) {
  VectorXcd v = s.state;
  // operators within a party multiply left-to-right; apply rightmost first
  for (int p = 0; p < m.n_parties(); ++p) {
    const auto& w = m.word(p);
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
      int setting = *it;
      if (setting > 2) throw std::invalid_argument("strategies define two settings");
      v = apply_single(s.observables[p][setting - 1], p, s.n, v);
    }
  }
  return v;
}

}  // namespace

QubitObservable sigma_x() { return (Matrix2cd() << 0, 1, 1, 0).finished(); }
QubitObservable sigma_y() { return (Matrix2cd() << 0, -I, I, 0).finished(); }
QubitObservable sigma_z() { return (Matrix2cd() << 1, 0, 0, -1).finished(); }

QubitObservable xy_observable(double cx, double cy) {
  if (std::abs(cx * cx + cy * cy - 1.0) > 1e-12)
    throw std::invalid_argument("xy_observable needs cx^2 + cy^2 = 1");
  return cx * sigma_x() + cy * sigma_y();
}

QubitObservable identity_observable(double sign) {
  if (sign != 1.0 && sign != -1.0)
    throw std::invalid_argument("identity observable sign must be +1 or -1");
  return sign * Matrix2cd::Identity();
}

void QuantumStrategy::validate() const {
  if (n < 1 || n > kMaxParties)
    throw std::invalid_argument("strategy party count must be in [1, 8]");
  if (state.size() != (1ll << n))
    throw std::invalid_argument("state dimension must be 2^n");
  if (std::abs(state.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("state is not normalized");
  if (static_cast<int>(observables.size()) != n)
    throw std::invalid_argument("need one observable pair per party");
  for (const auto& pair : observables)
    for (const auto& o : pair) {
      if ((o - o.adjoint()).norm() > 1e-12)
        throw std::invalid_argument("observable is not Hermitian");
      if ((o * o - Matrix2cd::Identity()).norm() > 1e-12)
        throw std::invalid_argument("observable does not square to identity");
    }
}

double expectation(const QuantumStrategy& s, const Monomial& m) {
  if (m.n_parties() > s.n)
    throw std::invalid_argument("monomial references party beyond strategy");
  return s.state.dot(apply_monomial(s, m)).real();
}

double expectation(const QuantumStrategy& s, const BellExpression& e) {
  double total = 0.0;
  for (const auto& [m, c] : e.terms()) total += c * expectation(s, m);
  return total;
}

Behavior behavior(const QuantumStrategy& s) {
  Behavior b(s.n, 2);
  std::vector<int> settings(s.n), outcomes(s.n);
  const int tuples = 1 << s.n;
  for (int si = 0; si < tuples; ++si) {
    for (int p = 0; p < s.n; ++p) settings[p] = ((si >> (s.n - 1 - p)) & 1) + 1;
    // project party by party: the 2^n leaves are the outcome probabilities
    std::vector<VectorXcd> layer{s.state};
    for (int p = 0; p < s.n; ++p) {
      const Matrix2cd& o = s.observables[p][settings[p] - 1];
      Matrix2cd proj_plus = (Matrix2cd::Identity() + o) / 2.0;
      Matrix2cd proj_minus = (Matrix2cd::Identity() - o) / 2.0;
      std::vector<VectorXcd> next;
      next.reserve(layer.size() * 2);
      for (const auto& v : layer) {
        next.push_back(apply_single(proj_plus, p, s.n, v));
        next.push_back(apply_single(proj_minus, p, s.n, v));
      }
      layer = std::move(next);
    }
    for (int ai = 0; ai < tuples; ++ai) {
      for (int p = 0; p < s.n; ++p) outcomes[p] = (ai >> (s.n - 1 - p)) & 1;
      b.at(settings, outcomes) = layer[ai].squaredNorm();
    }
  }
  return b;
}

double prefix_plus_probability(const QuantumStrategy& s, int k) {
  if (k < 0 || k > s.n)
    throw std::invalid_argument("prefix length must be between 0 and n_parties");
  VectorXcd v = s.state;
  for (int p = 0; p < k; ++p) {
    const Matrix2cd& o = s.observables[p][0];
    v = apply_single((Matrix2cd::Identity() + o) / 2.0, p, s.n, v);
  }
  return v.squaredNorm();
}

// ---- factories --------------------------------------------------------------

QuantumStrategy ghz_strategy(int n) {
  if (n < 2 || n > kMaxParties)
    throw std::invalid_argument("ghz strategy needs 2..8 parties");
  QuantumStrategy s;
  s.n = n;
  s.state = VectorXcd::Zero(1ll << n);
  s.state[0] = 1.0 / std::numbers::sqrt2;
  s.state[(1ll << n) - 1] = 1.0 / std::numbers::sqrt2;
  s.observables.assign(n, {sigma_x(), sigma_y()});
  s.validate();
  return s;
}

namespace {

// Expands amplitudes given in the |±>^n product basis (mask bit = 1 means |->
// for that party, party 0 = MSB) into the computational basis.
VectorXcd from_pm_basis(int n, const std::vector<complex<double>>& pm_amps) {
  const long long dim = 1ll << n;
  VectorXcd out = VectorXcd::Zero(dim);
  const double scale = std::pow(2.0, -0.5 * n);
  for (long long mask = 0; mask < dim; ++mask) {
    if (pm_amps[mask] == complex<double>{}) continue;
    for (long long j = 0; j < dim; ++j) {
      // <j|mask_pm> = 2^{-n/2} (-1)^{popcount(j & mask)}
      double sign = std::popcount(static_cast<unsigned long long>(j & mask)) % 2 ? -1.0 : 1.0;
      out[j] += pm_amps[mask] * scale * sign;
    }
  }
  return out;
}

double mermin_value(const QuantumStrategy& s) { return expectation(s, mermin()); }
double mermin_prime_value(const QuantumStrategy& s) {
  return expectation(s, mermin_prime());
}

}  // namespace

QuantumStrategy local_tangent_strategy(double theta, double phi) {
  constexpr double pi = std::numbers::pi;
  if (theta < pi / 4 - 1e-12 || theta > pi / 2 + 1e-12)
    throw std::invalid_argument("local tangent strategy needs theta in [pi/4, pi/2]");
  QuantumStrategy s;
  s.n = 3;
  const double c = std::cos(theta / 2) / std::numbers::sqrt2;
  const double d = std::sin(theta / 2) / std::numbers::sqrt2;
  std::vector<complex<double>> pm(8, 0.0);
  pm[0b000] = c;  // |+++>
  pm[0b011] = c;  // |+-->
  pm[0b101] = d;  // |-+->
  pm[0b110] = d;  // |--+>
  s.state = from_pm_basis(3, pm);
  s.observables = {{{sigma_x(), sigma_y()}},
                   {{sigma_x(), sigma_y()}},
                   {{xy_observable(std::cos(phi), -std::sin(phi)),
                     xy_observable(std::sin(phi), std::cos(phi))}}};
  s.validate();
  check_contract(std::abs(expectation(s, Monomial::parse("A1", 3)) - std::cos(theta)) < 1e-10,
                 "local_tangent <A1> = cos(theta)");
  double lin = std::cos(phi) * mermin_value(s) + std::sin(phi) * mermin_prime_value(s);
  check_contract(std::abs(lin - 2.0 * (1.0 + std::sin(theta))) < 1e-10,
                 "local_tangent cos(phi)M + sin(phi)M' = 2(1 + sin(theta))");
  return s;
}

QuantumStrategy linearisation_violator_strategy(double phi) {
  constexpr double pi = std::numbers::pi;
  QuantumStrategy s;
  s.n = 3;
  // |+>_A ⊗ (e^{-iπ/8}|11> + e^{iπ/8}|22>)/√2
  VectorXcd bc = VectorXcd::Zero(4);
  bc[0b00] = std::exp(-I * (pi / 8)) / std::numbers::sqrt2;
  bc[0b11] = std::exp(I * (pi / 8)) / std::numbers::sqrt2;
  s.state = VectorXcd::Zero(8);
  for (int j = 0; j < 4; ++j) {
    s.state[j] = bc[j] / std::numbers::sqrt2;        // A bit 0 (|1>_A)
    s.state[4 + j] = bc[j] / std::numbers::sqrt2;    // A bit 1 (|2>_A)
  }
  s.observables = {{{identity_observable(1.0), identity_observable(-1.0)},
                    {sigma_x(), sigma_y()},
                    {xy_observable(std::cos(phi), -std::sin(phi)),
                     xy_observable(std::sin(phi), std::cos(phi))}}};
  s.validate();
  check_contract(std::abs(expectation(s, Monomial::parse("A1", 3)) - 1.0) < 1e-10,
                 "violator <A1> = 1");
  double lin = std::cos(phi) * mermin_value(s) + std::sin(phi) * mermin_prime_value(s);
  check_contract(std::abs(lin - 2.0 * std::numbers::sqrt2) < 1e-10,
                 "violator cos(phi)M + sin(phi)M' = 2*sqrt(2)");
  return s;
}

QuantumStrategy nparty_strategy(int n, double lambda, double mu) {
  if (n < 3 || n > kMaxParties)
    throw std::invalid_argument("nparty strategy needs 3..8 parties");
  if (lambda < 0 || mu < 0 || (lambda == 0 && mu == 0))
    throw std::invalid_argument("nparty strategy needs lambda, mu >= 0, not both 0");
  const long long q = 1ll << (n - 1);  // Q_n = 2^{n-1}
  const double norm = std::sqrt(lambda * lambda + (q - 1) * mu * mu);
  lambda /= norm;
  mu /= norm;

  QuantumStrategy s;
  s.n = n;
  std::vector<complex<double>> pm(1ll << n, 0.0);
  pm[0] = lambda;
  for (long long mask = 1; mask < (1ll << n); ++mask) {
    int minuses = std::popcount(static_cast<unsigned long long>(mask));
    if (minuses >= 2 && minuses % 2 == 0) pm[mask] = mu;
  }
  s.state = from_pm_basis(n, pm);
  s.observables.assign(n, {sigma_x(), sigma_y()});
  s.validate();

  // contract: P(+...+ on first n-1 parties | settings 1) = λ²,
  //           M_n = (λ + (Q_n - 1)μ)²
  Behavior b = behavior(s);
  Behavior front = b.marginal([&] {
    std::vector<int> ps(n - 1);
    for (int p = 0; p < n - 1; ++p) ps[p] = p;
    return ps;
  }());
  double p_plus = front.at(std::vector<int>(n - 1, 1), std::vector<int>(n - 1, 0));
  check_contract(std::abs(p_plus - lambda * lambda) < 1e-10,
                 "nparty P(+..+|1..1) = lambda^2");
  double target = (lambda + (q - 1) * mu) * (lambda + (q - 1) * mu);
  check_contract(std::abs(expectation(s, mermin_n(n)) - target) < 1e-10,
                 "nparty M_n = (lambda + (Q_n - 1) mu)^2");
  return s;
}

QuantumStrategy two_party_strategy(double lambda, double mu) {
  QuantumStrategy s = nparty_strategy(3, lambda, mu);
  // additional contract: P_AB(++|11) = λ² (equal to the three-party value)
  Behavior ab = behavior(s).marginal({0, 1});
  double norm = std::sqrt(lambda * lambda + 3 * mu * mu);
  double l = lambda / norm;
  check_contract(std::abs(ab.at({1, 1}, {0, 0}) - l * l) < 1e-10,
                 "two_party P_AB(++|11) = lambda^2");
  return s;
}

QuantumStrategy deterministic_strategy(const std::vector<std::array<int, 2>>& signs) {
  QuantumStrategy s;
  s.n = static_cast<int>(signs.size());
  if (s.n < 1 || s.n > kMaxParties)
    throw std::invalid_argument("deterministic strategy needs 1..8 parties");
  s.state = VectorXcd::Zero(1ll << s.n);
  s.state[0] = 1.0;
  for (const auto& pair : signs)
    s.observables.push_back({identity_observable(static_cast<double>(pair[0])),
                             identity_observable(static_cast<double>(pair[1]))});
  s.validate();
  return s;
}

QuantumStrategy two_party_linear_endpoint() {
  QuantumStrategy s = deterministic_strategy({{{1, 1}}, {{1, 1}}, {{1, -1}}});
  check_contract(std::abs(mermin_value(s) - 2.0) < 1e-12, "endpoint M = 2");
  return s;
}

QuantumStrategy nparty_linear_endpoint(int n) {
  if (n < 3 || n > kMaxParties)
    throw std::invalid_argument("nparty endpoint needs 3..8 parties");
  std::vector<std::array<int, 2>> signs(n, {1, 1});
  for (int p = (n + 1) / 2; p < n; ++p) signs[p] = {1, -1};
  QuantumStrategy s = deterministic_strategy(signs);
  const double local_bound = std::pow(2.0, (n % 2) ? (n - 1) / 2.0 : n / 2.0);
  check_contract(std::abs(expectation(s, mermin_n(n)) - local_bound) < 1e-12,
                 "nparty endpoint M_n = L_n");
  return s;
}

QuantumStrategy make_strategy(const std::string& kind, int n_parties, double theta,
                              double phi, double lambda, double mu) {
  if (kind == "ghz") return ghz_strategy(n_parties);
  if (kind == "local_tangent") return local_tangent_strategy(theta, phi);
  if (kind == "linearisation_violator") return linearisation_violator_strategy(phi);
  if (kind == "two_party") return two_party_strategy(lambda, mu);
  if (kind == "nparty") return nparty_strategy(n_parties, lambda, mu);
  throw std::invalid_argument("unknown strategy kind '" + kind + "'");
}

// ---- JSON -------------------------------------------------------------------

std::string QuantumStrategy::to_json() const {
  nlohmann::ordered_json j;
  j["parties"] = n;
  auto& st = j["state"] = nlohmann::json::array();
  for (long long i = 0; i < state.size(); ++i)
    st.push_back({state[i].real(), state[i].imag()});
  auto& obs = j["observables"] = nlohmann::json::array();
  for (const auto& pair : observables) {
    nlohmann::ordered_json party = nlohmann::ordered_json::array();
    for (const auto& o : pair) {
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (int r = 0; r < 2; ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (int c = 0; c < 2; ++c) row.push_back({o(r, c).real(), o(r, c).imag()});
        rows.push_back(row);
      }
      party.push_back(rows);
    }
    obs.push_back(party);
  }
  return j.dump();
}

QuantumStrategy QuantumStrategy::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  QuantumStrategy s;
  s.n = j.at("parties").get<int>();
  const auto& st = j.at("state");
  s.state = VectorXcd::Zero(static_cast<long long>(st.size()));
  for (std::size_t i = 0; i < st.size(); ++i)
    s.state[static_cast<long long>(i)] =
        complex<double>(st[i][0].get<double>(), st[i][1].get<double>());
  for (const auto& party : j.at("observables")) {
    std::array<QubitObservable, 2> pair;
    for (int k = 0; k < 2; ++k)
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
          pair[k](r, c) = complex<double>(party[k][r][c][0].get<double>(),
                                          party[k][r][c][1].get<double>());
    s.observables.push_back(pair);
  }
  s.validate();
  return s;
}

}  // namespace dirk
