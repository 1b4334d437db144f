#include "dirk/sos_verifier.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <type_traits>
#include <utility>

namespace dirk {
namespace {

constexpr double kPi = 3.14159265358979323846;

template <class S>
PolynomialT<S> observable(int party, int setting) {
  return PolynomialT<S>::from_monomial(Monomial::single({party, setting}, 3), S(1));
}

// Lifts an integer-coefficient expression (M, M', ...) to another scalar.
template <class S>
PolynomialT<S> lift(const BellExpression& e) {
  PolynomialT<S> out(e.n_parties());
  for (const auto& [m, c] : e.terms())
    out.add_term(m, S(static_cast<std::int64_t>(std::llround(c))));
  return out;
}

template <class S>
struct LocalAngles {
  S ct, st, cp, sp;  // cos/sin of theta and phi
};

// The eight Hermitian operators the local squares combine; first four pair
// with B+C sums, last four with B-C differences.
template <class S>
std::array<PolynomialT<S>, 8> local_basis(const LocalAngles<S>& g) {
  const auto a1 = observable<S>(0, 1);
  const auto a2 = observable<S>(0, 2);
  const auto bp1 = observable<S>(1, 1) + observable<S>(2, 1);
  const auto bp2 = observable<S>(1, 2) + observable<S>(2, 2);
  const auto bm1 = observable<S>(1, 1) - observable<S>(2, 1);
  const auto bm2 = observable<S>(1, 2) - observable<S>(2, 2);
  return {
      g.cp * bp1 + g.sp * bp2 - a1 * bp1,
      g.ct * bp2 - a1 * bp2 + g.st * (a2 * bp1),
      g.sp * bp1 - g.cp * bp2 - a1 * bp2,
      g.ct * bp1 - a1 * bp1 - g.st * (a2 * bp2),
      g.cp * bm1 + g.sp * bm2 + a1 * bm1,
      g.ct * bm2 - a1 * bm2 + g.st * (a2 * bm1),
      g.sp * bm1 - g.cp * bm2 + a1 * bm2,
      g.ct * bm1 - a1 * bm1 - g.st * (a2 * bm2),
  };
}

template <class S>
PolynomialT<S> local_target_poly(const LocalAngles<S>& g) {
  const S half = S(1) / S(2);
  PolynomialT<S> t = PolynomialT<S>::constant(3, S(1) + g.st);
  t -= g.ct * observable<S>(0, 1);
  t -= (g.st * half * g.cp) * lift<S>(mermin());
  t -= (g.st * half * g.sp) * lift<S>(mermin_prime());
  return t;
}

void require_local_theta(double theta) {
  if (!(theta >= kPi / 4 - 1e-12 && theta <= kPi / 2 + 1e-12))
    throw std::domain_error("theta outside [pi/4, pi/2]");
}

void require_two_party_cone(double lambda, double mu) {
  if (!(mu > 0.0) || lambda < mu - 1e-12 || lambda > 3 * mu + 1e-12)
    throw std::domain_error("parameters outside the cone 3*mu >= lambda >= mu > 0");
}

// Radicands that are nonnegative in exact arithmetic may round slightly
// below zero; anything clearly negative is an internal error.
double clamped_radicand(double x) {
  if (x < -1e-12) throw std::logic_error("negative radicand in certificate coefficients");
  return x < 0.0 ? 0.0 : x;
}

struct Neumaier {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

// A square in Gram form: only the coefficient products c_j c_k are kept, so
// scalars that cannot represent the individual coefficients still work.
template <class S>
struct GramSquare {
  std::vector<PolynomialT<S>> basis;
  std::vector<std::vector<S>> products;  // symmetric, products[j][k] = c_j c_k
};

template <class S>
PolynomialT<S> expand_gram(int n_parties, const std::vector<GramSquare<S>>& squares) {
  if constexpr (std::is_same_v<S, double>) {
    std::map<Monomial, Neumaier> acc;
    for (const auto& sq : squares) {
      const std::size_t n = sq.basis.size();
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = j; k < n; ++k) {
          const double c = sq.products[j][k];
          if (c == 0.0) continue;
          PolynomialT<S> prod = sq.basis[j] * sq.basis[k];
          if (k > j) prod += sq.basis[k] * sq.basis[j];
          for (const auto& [m, v] : prod.terms()) acc[m].add(c * v);
        }
    }
    PolynomialT<S> out(n_parties);
    for (const auto& [m, a] : acc) out.add_term(m, a.value());
    return out;
  } else {
    PolynomialT<S> out(n_parties);
    for (const auto& sq : squares) {
      const std::size_t n = sq.basis.size();
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = j; k < n; ++k) {
          const S& c = sq.products[j][k];
          if (c == S{}) continue;
          PolynomialT<S> prod = sq.basis[j] * sq.basis[k];
          if (k > j) prod += sq.basis[k] * sq.basis[j];
          out += prod * c;
        }
    }
    return out;
  }
}

std::vector<GramSquare<double>> to_gram(const SosCertificate& cert) {
  std::vector<GramSquare<double>> out;
  out.reserve(cert.squares.size());
  for (const auto& sq : cert.squares) {
    if (sq.coefficients.size() != sq.basis.size())
      throw std::invalid_argument("square has mismatched coefficient/basis lengths");
    GramSquare<double> g;
    g.basis = sq.basis;
    const std::size_t n = sq.coefficients.size();
    g.products.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        g.products[j][k] = sq.coefficients[j] * sq.coefficients[k];
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace

OperatorPolynomial FactoredSquare::expand() const {
  if (coefficients.size() != basis.size())
    throw std::invalid_argument("square has mismatched coefficient/basis lengths");
  OperatorPolynomial out(basis.empty() ? 0 : basis.front().n_parties());
  for (std::size_t j = 0; j < basis.size(); ++j) out += basis[j] * coefficients[j];
  return out;
}

OperatorPolynomial local_tangent_target(double theta, double phi) {
  require_local_theta(theta);
  return local_target_poly<double>(
      {std::cos(theta), std::sin(theta), std::cos(phi), std::sin(phi)});
}

SosCertificate local_sos_certificate(double theta, double phi) {
  require_local_theta(theta);
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(phi), sp = std::sin(phi);
  const double w = std::sqrt(clamped_radicand(-std::cos(2 * theta)));

  const double alpha = std::sin(phi / 2) / (4 * std::cos(theta / 2));
  const double beta = std::cos(phi / 2) / (4 * std::cos(theta / 2));
  const double gamma = std::sqrt(clamped_radicand(st + ct * cp - sp * w)) / 4;
  const double sgn = (ct * sp + cp * w) >= 0 ? -1.0 : 1.0;
  const double delta = sgn * std::sqrt(clamped_radicand(st - ct * cp + sp * w)) / 4;

  // The two identities that make the expansion close onto the target.
  const double id1 = 8 * (gamma * gamma + delta * delta) - st;
  const double id2 = 8 * cp * (gamma * gamma - delta * delta) - 16 * sp * gamma * delta - ct;
  if (std::abs(id1) > 1e-12 || std::abs(id2) > 1e-12)
    throw std::logic_error("certificate coefficient identities violated");

  auto r = local_basis<double>({ct, st, cp, sp});
  SosCertificate cert;
  cert.params = {{"theta", theta}, {"phi", phi}};
  cert.squares = {
      {"P+1", {alpha, beta, -beta, -alpha}, {r[0], r[1], r[2], r[3]}},
      {"P+2", {gamma, -delta}, {r[0], r[2]}},
      {"P-1", {beta, alpha, alpha, beta}, {r[4], r[5], r[6], r[7]}},
      {"P-2", {delta, gamma}, {r[4], r[6]}},
  };
  return cert;
}

OperatorPolynomial two_party_target(double lambda, double mu) {
  require_two_party_cone(lambda, mu);
  const double alpha = 4 * lambda * mu;
  const double beta = (lambda - mu) * (lambda + 3 * mu);
  const double gamma = (3 * lambda + mu) * (lambda + 3 * mu);
  const auto a1 = observable<double>(0, 1);
  const auto b1 = observable<double>(1, 1);
  OperatorPolynomial t = OperatorPolynomial::constant(3, gamma);
  t -= beta * (a1 + b1 + a1 * b1);
  t -= alpha * mermin();
  return t;
}

SosCertificate two_party_sos_certificate(double lambda, double mu) {
  require_two_party_cone(lambda, mu);
  const double l = lambda, m = mu;
  const double dm = clamped_radicand(l - m);      // lambda - mu >= 0 on the cone
  const double d3 = clamped_radicand(3 * m - l);  // 3 mu - lambda >= 0

  const auto a1 = observable<double>(0, 1), a2 = observable<double>(0, 2);
  const auto b1 = observable<double>(1, 1), b2 = observable<double>(1, 2);
  const auto c1 = observable<double>(2, 1), c2 = observable<double>(2, 2);
  const auto unit = OperatorPolynomial::constant(3, 1.0);

  const auto rpp1 = (a1 + b1) * (unit - c1);
  const auto rpp2 = c1 - a1 * b1;
  const auto rpp3 = (l - m) * (l - m) * unit + (l + m) * (l + m) * c1 -
                    (l * l - m * m) * (a1 + b1) + 4 * l * m * (a2 * b2);
  const auto rpp4 = (l - m) * (l - m) * unit + m * (l + m) * (a1 + b1) -
                    (l * l - m * m) * c1 + 2 * l * m * ((a2 + b2) * c2);
  const auto rpm2 = (a2 + b2) - 2.0 * c2 - (a1 * b2 + a2 * b1) + (a1 + b1) * c2;
  const auto rmp1 = (a1 - b1) * (unit + c1);
  const auto rmp2 = (l + m) * (a1 - b1) - 2 * m * ((a2 - b2) * c2);
  const auto rmm1 = (a2 - b2) * (unit - c1);
  const auto rmm2 = 2 * m * (a2 - b2) - (l + m) * ((a1 - b1) * c2);
  const auto rmm3 = (l - m) * (a2 - b2) + (l + m) * (a1 * b2 - a2 * b1);

  const double cpp1 = std::sqrt(l + m) / (4 * std::sqrt(m)) * d3;
  const double cpp2 = std::sqrt((l + m) * dm * d3) / (4 * std::sqrt(m));
  const double cpp3 = std::sqrt(d3) / (2 * std::sqrt(m) * (l + m));
  const double cpp4 = 1 / (2 * std::sqrt(l * m));
  const double cpm2 = 0.5 * std::sqrt(l * dm);
  const double cmp1 = 0.5 * std::sqrt(l / (2 * m)) * std::sqrt(dm * dm + 4 * m * m);
  const double cmp2 = 0.5 * std::sqrt(l * d3 / (m * (l + m)));
  const double cmm1 = std::sqrt(l * dm / 2);
  const double cmm3 = std::sqrt(l * dm) / (2 * (l + m));

  SosCertificate cert;
  cert.params = {{"lambda", lambda}, {"mu", mu}};
  cert.squares = {
      {"P++1", {cpp1}, {rpp1}},
      {"P++2", {cpp2, 2 * cpp2}, {rpp1, rpp2}},
      {"P++3", {cpp3}, {rpp3}},
      {"P++4", {cpp4 * dm / (l + m), cpp4}, {rpp3, rpp4}},
      {"P+-2", {cpm2}, {rpm2}},
      {"P-+1", {cmp1}, {rmp1}},
      {"P-+2", {cmp2}, {rmp2}},
      {"P--1", {cmm1}, {rmm1}},
      {"P--3", {cmm3, cmm3}, {rmm2, rmm3}},
  };
  return cert;
}

OperatorPolynomial expand_square_sum(const SosCertificate& c) {
  int n_parties = 0;
  for (const auto& sq : c.squares)
    if (!sq.basis.empty()) {
      n_parties = sq.basis.front().n_parties();
      break;
    }
  return expand_gram<double>(n_parties, to_gram(c));
}

VerifyReport verify_report(const SosCertificate& c, const OperatorPolynomial& target) {
  const OperatorPolynomial diff = expand_square_sum(c) - target;
  VerifyReport rep;
  rep.worst_monomial = Monomial::identity(target.n_parties());
  for (const auto& [m, v] : diff.terms())
    if (std::abs(v) > rep.residual) {
      rep.residual = std::abs(v);
      rep.worst_monomial = m;
    }
  return rep;
}

double verify(const SosCertificate& c, const OperatorPolynomial& target) {
  return verify_report(c, target).residual;
}

SosCertificate with_corrupted_coefficient(SosCertificate c, std::size_t square,
                                          std::size_t term, double delta) {
  if (square >= c.squares.size() || term >= c.squares[square].coefficients.size())
    throw std::out_of_range("corruption indices outside certificate");
  c.squares[square].coefficients[term] += delta;
  return c;
}

// ---- exact anchors ----------------------------------------------------------

namespace {

struct ExactAngles {
  Surd2 ct, st, cp, sp, w;  // w = sqrt(-cos 2 theta)
};

ExactAngles anchor_angles(AnchorTheta theta, AnchorPhi phi) {
  ExactAngles g;
  if (theta == AnchorTheta::QuarterPi) {
    g.ct = g.st = Surd2(Rational(0), Rational(1, 2));  // sqrt2 / 2
    g.w = Surd2(0);
  } else {
    g.ct = Surd2(0);
    g.st = Surd2(1);
    g.w = Surd2(1);
  }
  if (phi == AnchorPhi::Zero) {
    g.cp = Surd2(1);
    g.sp = Surd2(0);
  } else {
    g.cp = Surd2(0);
    g.sp = Surd2(1);
  }
  return g;
}

}  // namespace

ExactCheck local_sos_exact_check(AnchorTheta theta, AnchorPhi phi) {
  const ExactAngles g = anchor_angles(theta, phi);
  const LocalAngles<Surd2> angles{g.ct, g.st, g.cp, g.sp};
  auto r = local_basis<Surd2>(angles);

  // Quadratic coefficient products.  Individual coefficients can leave
  // Q(sqrt2) (they involve cos(pi/8) at theta = pi/4) but these do not:
  //   alpha^2 = (1 - cos p) / (16 (1 + cos t)),   alpha*beta = sin p / (...),
  //   beta^2  = (1 + cos p) / (16 (1 + cos t)),
  //   gamma^2 = r_g / 16, delta^2 = r_d / 16, gamma*delta = s*sqrt(g^2 d^2)
  // with r_g = sin t + cos t cos p - sin p w, r_d = sin t - cos t cos p + sin p w.
  const Surd2 one(1), sixteen(16);
  const Surd2 denom = sixteen * (one + g.ct);
  const Surd2 aa = (one - g.cp) / denom;
  const Surd2 bb = (one + g.cp) / denom;
  const Surd2 ab = g.sp / denom;
  const Surd2 gg = (g.st + g.ct * g.cp - g.sp * g.w) / sixteen;
  const Surd2 dd = (g.st - g.ct * g.cp + g.sp * g.w) / sixteen;
  const int sgn = (g.ct * g.sp + g.cp * g.w).sign() >= 0 ? -1 : 1;
  const auto root = Surd2::exact_sqrt(gg * dd);
  if (!root) return {false, "gamma*delta is not exactly representable at this anchor"};
  const Surd2 gd = sgn > 0 ? *root : -*root;

  struct Sym {
    int atom;  // 0 = alpha (resp. gamma), 1 = beta (resp. delta)
    int sign;
  };
  using Atoms = std::array<std::array<Surd2, 2>, 2>;
  const Atoms q_ab{{{aa, ab}, {ab, bb}}};
  const Atoms q_gd{{{gg, gd}, {gd, dd}}};
  const auto build = [](const std::vector<Sym>& syms, const Atoms& q,
                        std::vector<PolynomialT<Surd2>> basis) {
    GramSquare<Surd2> sq;
    sq.basis = std::move(basis);
    const std::size_t n = syms.size();
    sq.products.assign(n, std::vector<Surd2>(n));
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        sq.products[j][k] =
            Surd2(syms[j].sign * syms[k].sign) * q[syms[j].atom][syms[k].atom];
    return sq;
  };

  std::vector<GramSquare<Surd2>> squares;
  squares.push_back(build({{0, 1}, {1, 1}, {1, -1}, {0, -1}}, q_ab,
                          {r[0], r[1], r[2], r[3]}));               // P+1
  squares.push_back(build({{0, 1}, {1, -1}}, q_gd, {r[0], r[2]}));  // P+2
  squares.push_back(build({{1, 1}, {0, 1}, {0, 1}, {1, 1}}, q_ab,
                          {r[4], r[5], r[6], r[7]}));               // P-1
  squares.push_back(build({{1, 1}, {0, 1}}, q_gd, {r[4], r[6]}));   // P-2

  const PolynomialT<Surd2> expanded = expand_gram<Surd2>(3, squares);
  const PolynomialT<Surd2> target = local_target_poly<Surd2>(angles);
  if (expanded == target) return {true, ""};

  for (const auto& [m, v] : target.terms()) {
    const Surd2 got = expanded.coefficient(m);
    if (!(got == v))
      return {false, m.str() + ": got " + got.str() + ", expected " + v.str()};
  }
  for (const auto& [m, v] : expanded.terms())
    if (target.coefficient(m) == Surd2{})
      return {false, m.str() + ": got " + v.str() + ", expected 0"};
  return {false, "polynomials differ"};
}

}  // namespace dirk
