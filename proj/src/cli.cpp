#include "dirk/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dirk/analytic_bounds.hpp"
#include "dirk/behavior.hpp"
#include "dirk/bell_algebra.hpp"
#include "dirk/nosignalling.hpp"
#include "dirk/npa.hpp"
#include "dirk/quantum_sim.hpp"
#include "dirk/sos_verifier.hpp"

namespace dirk {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
using json = nlohmann::ordered_json;

// ---- plumbing ---------------------------------------------------------------

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json jnum(double v) {
  if (std::isnan(v)) return nullptr;  // dumped as null
  return v;
}

int write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream out(path);
  out << text;
  if (!out) {
    std::cerr << "error: cannot write '" << path << "'\n";
    return 2;
  }
  return 0;
}

int default_jobs() {
  if (const char* env = std::getenv("DIRK_JOBS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
  }
  return 1;
}

// `fn` must not throw; collect per-point errors inside it.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::clamp(jobs, 1, std::max(1, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < n;) fn(i);
    });
  for (auto& th : pool) th.join();
}

// "start:stop:step" (mode "step") or "start:stop:count" (mode "count")
struct GridSpec {
  double start = 0.0, stop = 0.0, step = 0.0;
  int count = 0;
  bool count_mode = false;

  std::vector<double> points() const {
    std::vector<double> pts;
    if (count_mode) {
      if (count == 1) return {start};
      for (int i = 0; i < count; ++i)
        pts.push_back(start + (stop - start) * i / (count - 1));
      return pts;
    }
    // index-based stepping: accumulation error must not shift the endpoint
    int steps = static_cast<int>(std::floor((stop - start) / step + 1e-9));
    for (int i = 0; i <= steps; ++i) pts.push_back(std::min(start + i * step, stop));
    if (std::abs(pts.back() - stop) <= 1e-9 * std::max(1.0, std::abs(stop)))
      pts.back() = stop;
    return pts;
  }

  json to_json() const {
    json g{{"start", start}, {"stop", stop}};
    if (count_mode) {
      g["count"] = count;
      g["mode"] = "count";
    } else {
      g["step"] = step;
      g["mode"] = "step";
    }
    return g;
  }
};

GridSpec parse_grid(const std::string& text, const std::string& mode) {
  GridSpec g;
  g.count_mode = mode == "count";
  double third = 0.0;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &g.start, &g.stop, &third, &extra) != 3)
    throw std::invalid_argument("grid must be start:stop:" +
                                std::string(g.count_mode ? "count" : "step") +
                                ", got '" + text + "'");
  if (g.stop < g.start)
    throw std::invalid_argument("grid stop must be >= start");
  if (g.count_mode) {
    g.count = static_cast<int>(std::lround(third));
    if (g.count < 1 || std::abs(third - g.count) > 1e-9)
      throw std::invalid_argument("grid count must be a positive integer");
    if (g.count == 1 && g.stop != g.start)
      throw std::invalid_argument("grid count 1 requires stop == start");
  } else {
    g.step = third;
    if (!(g.step > 0)) throw std::invalid_argument("grid step must be > 0");
  }
  return g;
}

// ---- scenario / pin vocabulary ----------------------------------------------

std::string canonical_target(const std::string& scenario) {
  std::string t;
  for (char c : scenario) t.push_back(static_cast<char>(std::toupper(c)));
  return t;
}

BellExpression pin_expression(const std::string& name, int parties) {
  if (name == "mermin") return parties == 3 ? mermin() : mermin_n(parties);
  if (name == "mermin_prime") {
    if (parties != 3) throw std::invalid_argument("mermin_prime is tripartite");
    return mermin_prime();
  }
  if (name == "svetlichny") {
    if (parties != 3) throw std::invalid_argument("svetlichny is tripartite");
    return svetlichny();
  }
  if (name == "chsh") {
    if (parties != 2) throw std::invalid_argument("chsh is bipartite (--parties 2)");
    return chsh();
  }
  throw std::invalid_argument("unknown pin expression '" + name +
                              "' (mermin, mermin_prime, svetlichny, chsh)");
}

std::vector<std::pair<std::string, double>> parse_pins(
    const std::vector<std::string>& raw) {
  std::vector<std::pair<std::string, double>> pins;
  for (const auto& item : raw) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::invalid_argument("pin must be name=value, got '" + item + "'");
    std::size_t used = 0;
    double value = std::stod(item.substr(eq + 1), &used);
    if (eq + 1 + used != item.size())
      throw std::invalid_argument("bad pin value in '" + item + "'");
    pins.emplace_back(item.substr(0, eq), value);
  }
  return pins;
}

// ---- attaining strategies along the curves -----------------------------------

double attained_first_plus(const QuantumStrategy& s) {
  return (1 + expectation(s, Monomial::single({0, 1}, s.n))) / 2;
}

// Lower bound on P_g(A1|E) attained at pinned value v of M (svet=false) or of
// the Svetlichny combination M+M' (svet=true): tangent strategies on the
// nonlinear branch, a mixture with the maximally-violating deterministic-Alice
// strategy on the linear branch.
double strategy_local_curve(double v, bool svet) {
  const double root2 = std::numbers::sqrt2;
  const double base = svet ? 4.0 : 2 * root2;
  const double kink = svet ? 2 + 2 * root2 : 2 + root2;
  const double phi = svet ? kPi / 4 : 0.0;
  if (v <= base + 1e-12) return 1.0;
  if (v >= kink - 1e-12) {
    double arg = (svet ? v / (2 * root2) : v / 2) - 1;
    double theta = std::clamp(std::asin(std::clamp(arg, -1.0, 1.0)), kPi / 4, kPi / 2);
    return attained_first_plus(local_tangent_strategy(theta, phi));
  }
  double pb = attained_first_plus(linearisation_violator_strategy(phi));
  double pk = attained_first_plus(local_tangent_strategy(kPi / 4, phi));
  double w = (kink - v) / (kink - base);
  return w * pb + (1 - w) * pk;
}

// Lower bound on P_g(A1B1|E) (prefix=2) or P_g(A1B1C1|E) (prefix=3) at M = v:
// pure states for v >= 3, a mixture with the deterministic endpoint below.
double strategy_two_party_curve(double v, int prefix) {
  auto pure = [&](double m) {
    double u = std::asin(std::clamp(std::sqrt(m) / 2, 0.0, 1.0)) - kPi / 6;
    return prefix_plus_probability(
        two_party_strategy(std::cos(u), std::sin(u) / std::sqrt(3.0)), prefix);
  };
  double p_end = prefix_plus_probability(two_party_linear_endpoint(), prefix);
  if (v <= 2 + 1e-12) return p_end;
  if (v >= 3.0) return pure(v);
  double p3 = pure(3.0);
  double w = 3.0 - v;
  return w * p_end + (1 - w) * p3;
}

// n-party analogue against M_n = v (guessing the first n-1 outcomes).
double strategy_nparty_curve(int n, double v, const NPartyParams& pp) {
  const double q = pp.quantum_bound;
  const double r = std::sqrt(q - 1);
  auto pure = [&](double m) {
    double u = std::asin(std::clamp(std::sqrt(m / q), 0.0, 1.0)) - std::atan(1.0 / r);
    return prefix_plus_probability(nparty_strategy(n, std::cos(u), std::sin(u) / r),
                                   n - 1);
  };
  double p_end = prefix_plus_probability(nparty_linear_endpoint(n), n - 1);
  if (v <= pp.local_bound + 1e-12) return p_end;
  if (v >= pp.threshold) return pure(v);
  double pt = pure(pp.threshold);
  double w = (pp.threshold - v) / (pp.threshold - pp.local_bound);
  return w * p_end + (1 - w) * pt;
}

// ---- curve -------------------------------------------------------------------

struct CurveOpts {
  std::string scenario, pin = "mermin", grid, grid_mode = "step", level;
  std::string format = "csv", out;
  int jobs = 1;
  double tolerance = 1e-7;
};

std::string default_level(const std::string& target) {
  if (target == "A1") return "1+AB+AC";
  if (target == "A1B1") return "1+AB+AC+BC";
  return "1+A^2+AB+AC+BC";
}

int run_curve(const CurveOpts& o) {
  const std::string target = canonical_target(o.scenario);
  const std::string level_text = o.level.empty() ? default_level(target) : o.level;
  GuessingScenario sc = GuessingScenario::parse(target, 3);
  LevelSpec level = LevelSpec::parse(level_text, 3);
  BellExpression pin = pin_expression(o.pin, 3);
  GridSpec grid = parse_grid(o.grid, o.grid_mode);
  const std::vector<double> pts = grid.points();
  const int n = static_cast<int>(pts.size());

  std::vector<SweepTask> tasks(n);
  for (int i = 0; i < n; ++i) tasks[i] = {pts[i], {pts[i]}};
  std::vector<SweepPoint> npa =
      sweep_curve(sc, level, {pin}, tasks, o.jobs, o.tolerance);

  std::vector<double> analytic(n, kNaN), strategy(n, kNaN), ns(n, kNaN);
  std::atomic<int> ns_failures{0};
  parallel_for(n, o.jobs, [&](int i) {
    const double v = pts[i];
    try {
      if (o.pin == "mermin") {
        if (target == "A1") analytic[i] = local_gp_bound(v, 0).clamped;
        else if (target == "A1B1" || target == "A1B1C1")
          analytic[i] = two_party_gp_bound(v).clamped;
        else if (target == "A2B2C2") analytic[i] = global222_conjecture(v);
      } else if (o.pin == "svetlichny" && target == "A1") {
        analytic[i] = svetlichny_local_bound(v).clamped;
      }
    } catch (const std::exception&) {  // outside the formula's domain
    }
    if (o.pin == "mermin") {
      if (target == "A1") strategy[i] = strategy_local_curve(v, false);
      else if (target == "A1B1") strategy[i] = strategy_two_party_curve(v, 2);
      else if (target == "A1B1C1") strategy[i] = strategy_two_party_curve(v, 3);
    } else if (o.pin == "svetlichny" && target == "A1") {
      strategy[i] = strategy_local_curve(v, true);
    }
    try {
      ns[i] = gp_ns_bound(sc, {{pin, v}});
    } catch (const std::domain_error&) {  // value outside the NS polytope
    } catch (const std::exception&) {
      ns_failures.fetch_add(1);
    }
  });

  int failures = ns_failures.load();
  for (const auto& p : npa)
    if (p.status != "optimal" && p.status != "approx") ++failures;

  std::string text;
  if (o.format == "csv") {
    std::ostringstream os;
    os << "violation,npa_bound,analytic_bound,strategy_lower_bound,ns_bound,npa_status\n";
    for (int i = 0; i < n; ++i)
      os << num(pts[i]) << ',' << num(npa[i].bound) << ',' << num(analytic[i]) << ','
         << num(strategy[i]) << ',' << num(ns[i]) << ',' << npa[i].status << '\n';
    text = os.str();
  } else {
    json j{{"command", "curve"}, {"scenario", target},   {"pin", o.pin},
           {"level", level_text}, {"grid", grid.to_json()}, {"jobs", o.jobs}};
    json rows = json::array();
    for (int i = 0; i < n; ++i)
      rows.push_back(json{{"violation", pts[i]},
                          {"npa_bound", jnum(npa[i].bound)},
                          {"analytic_bound", jnum(analytic[i])},
                          {"strategy_lower_bound", jnum(strategy[i])},
                          {"ns_bound", jnum(ns[i])},
                          {"npa_status", npa[i].status}});
    j["rows"] = std::move(rows);
    j["failures"] = failures;
    text = j.dump(2) + "\n";
  }
  if (int rc = write_text(o.out, text)) return rc;
  return failures == 0 ? 0 : 3;
}

// ---- bound -------------------------------------------------------------------

struct BoundOpts {
  std::string scenario, level, format = "json", out;
  std::vector<std::string> pins;
  int parties = 3;
  double tolerance = 1e-7;
};

int run_bound(const BoundOpts& o) {
  GuessingScenario sc = GuessingScenario::parse(canonical_target(o.scenario), o.parties);
  const std::string level_text =
      !o.level.empty() ? o.level : (o.parties == 2 ? "1+AB" : "1+AB+AC+BC");
  LevelSpec level = LevelSpec::parse(level_text, o.parties);
  std::vector<PinnedExpression> pins;
  json jpins = json::object();
  for (const auto& [name, value] : parse_pins(o.pins)) {
    pins.push_back({pin_expression(name, o.parties), value});
    jpins[name] = value;
  }

  GpBound b = gp_bound(sc, level, pins, o.tolerance);
  const char* status = b.status == SolveStatus::Optimal      ? "optimal"
                       : b.status == SolveStatus::Infeasible ? "infeasible"
                                                             : "numerical-limit";
  bool converged = b.status == SolveStatus::Optimal ||
                   (b.status == SolveStatus::NumericalLimit && b.gap <= 1e-6);

  std::string text;
  if (o.format == "csv") {
    std::ostringstream os;
    os << "scenario,level,bound,status,gap,iterations\n"
       << canonical_target(o.scenario) << ',' << level_text << ',' << num(b.value)
       << ',' << status << ',' << num(b.gap) << ',' << b.iterations << '\n';
    text = os.str();
  } else {
    json j{{"command", "bound"},     {"scenario", canonical_target(o.scenario)},
           {"parties", o.parties},   {"level", level_text},
           {"pins", jpins},          {"bound", jnum(converged ? b.value : kNaN)},
           {"status", status},       {"gap", jnum(b.gap)},
           {"iterations", b.iterations}};
    if (!b.detail.empty()) j["detail"] = b.detail;
    text = j.dump(2) + "\n";
  }
  if (int rc = write_text(o.out, text)) return rc;
  if (b.status == SolveStatus::Infeasible) {
    std::cerr << "error: pinned values are not attainable at this level\n";
    return 2;
  }
  return converged ? 0 : 3;
}

// ---- verify-sos ----------------------------------------------------------------

struct VerifySosOpts {
  std::string family, grid_theta, grid_phi, grid_ratio, grid_mode = "count";
  std::string format = "text", out;
  double theta = kNaN, phi = 0.0, lambda = kNaN, mu = kNaN;
  double corrupt = 0.0, tolerance = 1e-10;
};

SosCertificate maybe_corrupt(SosCertificate cert, double delta) {
  if (delta == 0.0) return cert;
  std::size_t si = 0, ti = 0;
  double best = -1;
  for (std::size_t i = 0; i < cert.squares.size(); ++i)
    for (std::size_t j = 0; j < cert.squares[i].coefficients.size(); ++j)
      if (std::abs(cert.squares[i].coefficients[j]) > best) {
        best = std::abs(cert.squares[i].coefficients[j]);
        si = i;
        ti = j;
      }
  return with_corrupted_coefficient(std::move(cert), si, ti, delta);
}

int run_verify_sos(const VerifySosOpts& o) {
  struct Point {
    double a, b, residual;
  };
  std::vector<Point> points;
  const bool local = o.family == "local";
  if (local) {
    if (!std::isnan(o.theta)) {
      points.push_back({o.theta, o.phi, 0});
    } else {
      GridSpec gt = parse_grid(
          o.grid_theta.empty() ? "0.7853981633974483:1.5707963267948966:20"
                               : o.grid_theta,
          o.grid_mode);
      GridSpec gp = parse_grid(
          o.grid_phi.empty() ? "0:6.283185307179586:20" : o.grid_phi, o.grid_mode);
      for (double t : gt.points())
        for (double p : gp.points()) points.push_back({t, p, 0});
    }
  } else {
    if (!std::isnan(o.lambda) || !std::isnan(o.mu)) {
      if (std::isnan(o.lambda) || std::isnan(o.mu))
        throw std::invalid_argument("two_party points need both --lambda and --mu");
      points.push_back({o.lambda, o.mu, 0});
    } else {
      GridSpec gr = parse_grid(o.grid_ratio.empty() ? "1:3:20" : o.grid_ratio,
                               o.grid_mode);
      for (double r : gr.points()) points.push_back({r, 1.0, 0});
    }
  }

  double max_residual = 0.0;
  for (auto& pt : points) {
    SosCertificate cert = local ? local_sos_certificate(pt.a, pt.b)
                                : two_party_sos_certificate(pt.a, pt.b);
    OperatorPolynomial target = local ? local_tangent_target(pt.a, pt.b)
                                      : two_party_target(pt.a, pt.b);
    pt.residual = verify(maybe_corrupt(std::move(cert), o.corrupt), target);
    max_residual = std::max(max_residual, pt.residual);
  }
  const bool pass = max_residual <= o.tolerance;

  std::string text;
  if (o.format == "json") {
    json j{{"command", "verify-sos"},
           {"family", o.family},
           {"tolerance", o.tolerance},
           {"corrupt", o.corrupt}};
    json rows = json::array();
    for (const auto& pt : points) {
      json row = local ? json{{"theta", pt.a}, {"phi", pt.b}}
                       : json{{"lambda", pt.a}, {"mu", pt.b}};
      row["residual"] = pt.residual;
      rows.push_back(std::move(row));
    }
    j["points"] = std::move(rows);
    j["max_residual"] = max_residual;
    j["pass"] = pass;
    text = j.dump(2) + "\n";
  } else {
    std::ostringstream os;
    for (const auto& pt : points)
      os << (local ? "theta=" : "lambda=") << num(pt.a)
         << (local ? " phi=" : " mu=") << num(pt.b) << " residual=" << pt.residual
         << '\n';
    os << "max residual " << max_residual << " (tolerance " << o.tolerance
       << ") -> " << (pass ? "PASS" : "FAIL") << '\n';
    text = os.str();
  }
  if (int rc = write_text(o.out, text)) return rc;
  return pass ? 0 : 1;
}

// ---- strategy ------------------------------------------------------------------

struct StrategyOpts {
  std::string kind, out;
  int parties = 3;
  double theta = kPi / 2, phi = 0.0, lambda = 1.0, mu = 1.0 / 3;
  bool with_behavior = false;
};

int run_strategy(const StrategyOpts& o) {
  QuantumStrategy s =
      make_strategy(o.kind, o.parties, o.theta, o.phi, o.lambda, o.mu);
  s.validate();

  json params = json::object();
  if (o.kind == "local_tangent") params = {{"theta", o.theta}, {"phi", o.phi}};
  if (o.kind == "linearisation_violator") params = {{"phi", o.phi}};
  if (o.kind == "two_party" || o.kind == "nparty")
    params = {{"lambda", o.lambda}, {"mu", o.mu}};

  json expectations = json::object();
  if (s.n == 3) {
    expectations["mermin"] = expectation(s, mermin());
    expectations["mermin_prime"] = expectation(s, mermin_prime());
    expectations["svetlichny"] = expectation(s, svetlichny());
  } else if (s.n == 2) {
    expectations["chsh"] = expectation(s, chsh());
  } else {
    expectations["mermin_n"] = expectation(s, mermin_n(s.n));
  }

  json attained{{"first_party_plus", prefix_plus_probability(s, 1)},
                {"all_plus", prefix_plus_probability(s, s.n)}};
  if (s.n >= 2) attained["first_two_plus"] = prefix_plus_probability(s, 2);

  json j{{"command", "strategy"}, {"kind", o.kind},
         {"parties", s.n},        {"parameters", params},
         {"expectations", expectations}, {"attained", attained},
         {"strategy", json::parse(s.to_json())}};
  if (o.with_behavior) j["behavior"] = json::parse(behavior(s).to_json());
  return write_text(o.out, j.dump(2) + "\n");
}

// ---- ns-bound ------------------------------------------------------------------

struct NsBoundOpts {
  std::string scenario, format = "json", out;
  std::vector<std::string> pins;
  double tolerance = 1e-9;
};

int run_ns_bound(const NsBoundOpts& o) {
  const std::string target = canonical_target(o.scenario);
  GuessingScenario sc = GuessingScenario::parse(target, 3);
  std::vector<PinnedExpression> pins;
  json jpins = json::object();
  bool standard = true;
  double m = 0.0, mp = 0.0;  // absent pin = unconstrained; forms peak at 0
  for (const auto& [name, value] : parse_pins(o.pins)) {
    pins.push_back({pin_expression(name, 3), value});
    jpins[name] = value;
    if (name == "mermin") m = value;
    else if (name == "mermin_prime") mp = value;
    else standard = false;
  }

  double lp = gp_ns_bound(sc, pins, o.tolerance);

  double closed = kNaN, envelope = kNaN, floor = kNaN;
  if (standard) {
    if (target == "A1") {
      BoundValue b = ns_local_bound(m, mp);
      closed = b.clamped;
      floor = b.floor;
    } else if (target == "A1B1") {
      BoundValue b = ns_two_party_bound(m, mp);
      closed = b.clamped;
      floor = b.floor;
    } else if (target == "A1B1C1" || target == "A2B2C2") {
      const bool swapped = target == "A2B2C2";
      BoundValue b = ns_global_bound(m, mp, swapped);
      closed = b.clamped;
      envelope = ns_global_envelope(m, mp, swapped).clamped;
      floor = b.floor;
    }
  }

  std::string text;
  if (o.format == "csv") {
    std::ostringstream os;
    os << "scenario,mermin,mermin_prime,lp_bound,closed_form,envelope\n"
       << target << ',' << num(standard ? m : kNaN) << ','
       << num(standard ? mp : kNaN) << ',' << num(lp) << ',' << num(closed) << ','
       << num(envelope) << '\n';
    text = os.str();
  } else {
    json j{{"command", "ns-bound"}, {"scenario", target}, {"pins", jpins},
           {"lp_bound", lp}};
    if (!std::isnan(closed)) j["closed_form"] = closed;
    if (!std::isnan(envelope)) j["envelope"] = envelope;
    if (!std::isnan(floor)) j["floor"] = floor;
    text = j.dump(2) + "\n";
  }
  return write_text(o.out, text);
}

// ---- attack-demo ---------------------------------------------------------------

struct AttackDemoOpts {
  std::string out;
  bool check_marginal = false;
};

int run_attack_demo(const AttackDemoOpts& o) {
  json report = json::parse(hbb_attack_report());

  bool ok = report.at("model_reconstruction_error").get<double>() <= 1e-9 &&
            report.at("alice_bob_marginal").at("local").get<bool>() &&
            report.at("steering_example").at("passes_no_signalling").get<bool>() &&
            report.at("steering_example").at("restriction_identical").get<bool>();
  for (const auto& c : report.at("conditionals"))
    ok = ok && c.at("local").get<bool>() &&
         c.at("l1_distance").get<double>() <= 1e-9 &&
         c.at("reconstruction_error").get<double>() <= 1e-9;

  if (int rc = write_text(o.out, report.dump(2) + "\n")) return rc;
  if (o.check_marginal) {
    std::ostream& line = o.out.empty() ? std::cerr : std::cout;
    line << "alice-bob marginal local: "
         << (report.at("alice_bob_marginal").at("local").get<bool>() ? "true"
                                                                     : "false")
         << '\n';
  }
  return ok ? 0 : 1;
}

// ---- nparty --------------------------------------------------------------------

struct NPartyOpts {
  std::string grid, grid_mode = "count", level, format = "csv", out;
  int n = 3, jobs = 1;
  double tolerance = 1e-7;
};

int run_nparty(const NPartyOpts& o) {
  if (o.n < 3 || o.n > 5)
    throw std::invalid_argument("--n must be between 3 and 5");
  NPartyParams pp = nparty_params(o.n);
  std::string grid_text = o.grid;
  if (grid_text.empty())
    grid_text = num(pp.local_bound) + ":" + num(pp.quantum_bound) + ":10";
  GridSpec grid = parse_grid(grid_text, o.grid_mode);
  const std::vector<double> pts = grid.points();
  const int n = static_cast<int>(pts.size());
  for (double v : pts)
    if (v < pp.local_bound - 1e-9 || v > pp.quantum_bound + 1e-9)
      throw std::invalid_argument("grid values must lie in [" +
                                  num(pp.local_bound) + ", " +
                                  num(pp.quantum_bound) + "]");

  std::vector<double> conjecture(n), strategy(n);
  parallel_for(n, o.jobs, [&](int i) {
    conjecture[i] = nparty_bound(o.n, pts[i]).clamped;
    strategy[i] = strategy_nparty_curve(o.n, pts[i], pp);
  });

  std::vector<SweepPoint> npa;
  if (!o.level.empty()) {
    if (o.n == 5)
      throw std::invalid_argument("NPA confirmation is not offered for n=5");
    GuessingScenario sc;
    sc.n_parties = o.n;
    for (int p = 0; p < o.n - 1; ++p) sc.guessed.push_back({p, 1});
    LevelSpec level = LevelSpec::parse(o.level, o.n);
    std::vector<SweepTask> tasks(n);
    for (int i = 0; i < n; ++i) tasks[i] = {pts[i], {pts[i]}};
    npa = sweep_curve(sc, level, {mermin_n(o.n)}, tasks, o.jobs, o.tolerance);
  }

  int failures = 0;
  for (const auto& p : npa)
    if (p.status != "optimal" && p.status != "approx") ++failures;

  std::string text;
  if (o.format == "csv") {
    std::ostringstream os;
    os << "m,conjecture_bound,strategy_lower_bound";
    if (!npa.empty()) os << ",npa_bound,npa_status";
    os << '\n';
    for (int i = 0; i < n; ++i) {
      os << num(pts[i]) << ',' << num(conjecture[i]) << ',' << num(strategy[i]);
      if (!npa.empty()) os << ',' << num(npa[i].bound) << ',' << npa[i].status;
      os << '\n';
    }
    text = os.str();
  } else {
    json j{{"command", "nparty"},
           {"n", o.n},
           {"local_bound", pp.local_bound},
           {"quantum_bound", pp.quantum_bound},
           {"threshold", pp.threshold},
           {"grid", grid.to_json()}};
    json rows = json::array();
    for (int i = 0; i < n; ++i) {
      json row{{"m", pts[i]},
               {"conjecture_bound", conjecture[i]},
               {"strategy_lower_bound", strategy[i]}};
      if (!npa.empty()) {
        row["npa_bound"] = jnum(npa[i].bound);
        row["npa_status"] = npa[i].status;
      }
      rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    j["failures"] = failures;
    text = j.dump(2) + "\n";
  }
  if (int rc = write_text(o.out, text)) return rc;
  return failures == 0 ? 0 : 3;
}

}  // namespace

// ---- argument surface ------------------------------------------------------

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"device-independent randomness bounds in the tripartite "
               "Mermin scenario"};
  app.require_subcommand(1);
  const int jobs_default = default_jobs();

  CurveOpts curve;
  curve.jobs = jobs_default;
  auto* c = app.add_subcommand(
      "curve", "guessing-probability bounds along a violation grid");
  c->add_option("--scenario", curve.scenario, "guessing target")
      ->required()
      ->check(CLI::IsMember({"a1", "a1b1", "a1b1c1", "a2b2c2"}, CLI::ignore_case));
  c->add_option("--pin", curve.pin, "swept Bell expression (default mermin)")
      ->check(CLI::IsMember({"mermin", "svetlichny"}));
  c->add_option("--grid", curve.grid, "start:stop:step (see --grid-mode)")
      ->required();
  c->add_option("--grid-mode", curve.grid_mode, "step|count (default step)")
      ->check(CLI::IsMember({"step", "count"}));
  c->add_option("--level", curve.level, "relaxation level (default per scenario)");
  c->add_option("--jobs", curve.jobs, "worker threads (default $DIRK_JOBS or 1)");
  c->add_option("--tolerance", curve.tolerance, "SDP tolerance")->check(CLI::PositiveNumber);
  c->add_option("--format", curve.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
  c->add_option("--out", curve.out, "output path (default stdout)");

  BoundOpts bound;
  auto* b = app.add_subcommand("bound", "single-point relaxation bound");
  b->add_option("--scenario", bound.scenario, "guessing target, e.g. a1b1")->required();
  b->add_option("--parties", bound.parties, "number of parties (default 3)")
      ->check(CLI::Range(2, 5));
  b->add_option("--level", bound.level, "relaxation level");
  b->add_option("--pin", bound.pins, "name=value, repeatable")->required();
  b->add_option("--tolerance", bound.tolerance, "SDP tolerance")->check(CLI::PositiveNumber);
  b->add_option("--format", bound.format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  b->add_option("--out", bound.out, "output path (default stdout)");

  VerifySosOpts vs;
  auto* v = app.add_subcommand("verify-sos",
                               "expand certificates and report residuals");
  v->add_option("--family", vs.family, "local|two_party")
      ->required()
      ->check(CLI::IsMember({"local", "two_party"}));
  v->add_option("--theta", vs.theta, "single point: theta (radians)");
  v->add_option("--phi", vs.phi, "single point: phi (radians, default 0)");
  v->add_option("--lambda", vs.lambda, "single point: lambda");
  v->add_option("--mu", vs.mu, "single point: mu");
  v->add_option("--grid-theta", vs.grid_theta, "theta grid (default pi/4..pi/2 x20)");
  v->add_option("--grid-phi", vs.grid_phi, "phi grid (default 0..2pi x20)");
  v->add_option("--grid-ratio", vs.grid_ratio, "lambda/mu grid at mu=1 (default 1:3:20)");
  v->add_option("--grid-mode", vs.grid_mode, "step|count (default count)")
      ->check(CLI::IsMember({"step", "count"}));
  v->add_option("--corrupt", vs.corrupt,
                "add delta to the largest stored coefficient (fault injection)");
  v->add_option("--tolerance", vs.tolerance, "residual tolerance (default 1e-10)")
      ->check(CLI::PositiveNumber);
  v->add_option("--format", vs.format, "text|json")
      ->check(CLI::IsMember({"text", "json"}));
  v->add_option("--out", vs.out, "output path (default stdout)");

  StrategyOpts st;
  auto* s = app.add_subcommand("strategy",
                               "emit a named strategy and its attained values");
  s->add_option("--kind", st.kind, "strategy family")
      ->required()
      ->check(CLI::IsMember({"ghz", "local_tangent", "linearisation_violator",
                             "two_party", "nparty"}));
  s->add_option("--parties", st.parties, "number of parties (default 3)")
      ->check(CLI::Range(2, 6));
  s->add_option("--theta", st.theta, "tangent angle (default pi/2)");
  s->add_option("--phi", st.phi, "linearisation angle (default 0)");
  s->add_option("--lambda", st.lambda, "state weight (default 1)");
  s->add_option("--mu", st.mu, "state weight (default 1/3)");
  s->add_flag("--with-behavior", st.with_behavior, "embed the full behavior table");
  s->add_option("--out", st.out, "output path (default stdout)");

  NsBoundOpts nb;
  auto* ns = app.add_subcommand("ns-bound",
                                "no-signalling guessing bound (exact LP)");
  ns->add_option("--scenario", nb.scenario, "guessing target")
      ->required()
      ->check(CLI::IsMember({"a1", "a1b1", "a1b1c1", "a2b2c2"}, CLI::ignore_case));
  ns->add_option("--pin", nb.pins, "name=value, repeatable");
  ns->add_option("--tolerance", nb.tolerance, "LP tolerance")->check(CLI::PositiveNumber);
  ns->add_option("--format", nb.format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  ns->add_option("--out", nb.out, "output path (default stdout)");

  AttackDemoOpts ad;
  auto* a = app.add_subcommand(
      "attack-demo", "secret-sharing insecurity report (GHZ hidden-variable model)");
  a->add_flag("--check-marginal", ad.check_marginal,
              "also print whether the Alice-Bob marginal is local");
  a->add_option("--out", ad.out, "output path (default stdout)");

  NPartyOpts np;
  np.jobs = jobs_default;
  auto* n = app.add_subcommand("nparty", "n-party conjecture and strategy table");
  n->add_option("--n", np.n, "number of parties (3..5)")->required();
  n->add_option("--grid", np.grid, "M_n grid (default local..quantum x10)");
  n->add_option("--grid-mode", np.grid_mode, "step|count (default count)")
      ->check(CLI::IsMember({"step", "count"}));
  n->add_option("--level", np.level, "optional NPA confirmation level (n<=4)");
  n->add_option("--jobs", np.jobs, "worker threads (default $DIRK_JOBS or 1)");
  n->add_option("--tolerance", np.tolerance, "SDP tolerance")->check(CLI::PositiveNumber);
  n->add_option("--format", np.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
  n->add_option("--out", np.out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(c)) return run_curve(curve);
    if (app.got_subcommand(b)) return run_bound(bound);
    if (app.got_subcommand(v)) return run_verify_sos(vs);
    if (app.got_subcommand(s)) return run_strategy(st);
    if (app.got_subcommand(ns)) return run_ns_bound(nb);
    if (app.got_subcommand(a)) return run_attack_demo(ad);
    if (app.got_subcommand(n)) return run_nparty(np);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 3;
  }
  return 2;  // unreachable with require_subcommand(1)
}

}  // namespace dirk
