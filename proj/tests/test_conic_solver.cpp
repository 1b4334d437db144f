#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "dirk/conic_solver.hpp"

using dirk::LinearProgram;
using dirk::SemidefiniteProgram;
using dirk::Solution;
using dirk::SolveStatus;

namespace {

void require_optimal(const Solution& sol) {
  INFO("status detail: " << sol.detail << ", iterations: " << sol.iterations);
  REQUIRE(sol.status == SolveStatus::Optimal);
}

// max p4 over the probability simplex with p1 pinned; also used for the
// duplicated-row and reproducibility checks
LinearProgram pinned_simplex() {
  LinearProgram lp;
  lp.resize(4);
  lp.maximize = true;
  lp.objective = {0, 0, 0, 1};
  int k = lp.add_row(1.0);
  for (int i = 0; i < 4; ++i) lp.add_row_entry(k, i, 1.0);
  k = lp.add_row(0.3);
  lp.add_row_entry(k, 0, 1.0);
  return lp;
}

SemidefiniteProgram coupling_sdp() {
  SemidefiniteProgram sdp;
  sdp.set_blocks({2});
  sdp.maximize = true;
  sdp.add_objective_entry(0, 0, 1, 1.0);  // contributes X01 + X10
  int k = sdp.add_constraint(0.5);
  sdp.add_constraint_entry(k, 0, 0, 0, 1.0);
  k = sdp.add_constraint(0.5);
  sdp.add_constraint_entry(k, 0, 1, 1, 1.0);
  return sdp;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("bounded scalar program attains its cap") {
  // max x subject to x + slack = 1, slack >= 0, x free
  LinearProgram lp;
  lp.resize(2);
  lp.maximize = true;
  lp.objective = {1, 0};
  lp.nonnegative = {false, true};
  const int k = lp.add_row(1.0);
  lp.add_row_entry(k, 0, 1.0);
  lp.add_row_entry(k, 1, 1.0);

  const Solution sol = dirk::solve_lp(lp);
  require_optimal(sol);
  CHECK(sol.primal_value == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(sol.dual_value == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(sol.gap <= 1e-7);
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("probability simplex with a pinned mass") {
  const LinearProgram lp = pinned_simplex();
  const Solution sol = dirk::solve_lp(lp);
  require_optimal(sol);
  CHECK(sol.primal_value == doctest::Approx(0.7).epsilon(1e-8));
  CHECK(sol.x[0] == doctest::Approx(0.3).epsilon(1e-7));
  double mass = 0;
  for (double v : sol.x) {
    CHECK(v >= -1e-8);
    mass += v;
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));

  // maximizing the full mass just returns the pinned total
  LinearProgram total = lp;
  total.objective = {1, 1, 1, 1};
  const Solution whole = dirk::solve_lp(total);
  require_optimal(whole);
  CHECK(whole.primal_value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("duplicated rows are tolerated") {
  LinearProgram lp = pinned_simplex();
  const int k = lp.add_row(0.3);  // exact duplicate of the pin row
  lp.add_row_entry(k, 0, 1.0);

  const Solution sol = dirk::solve_lp(lp);
  require_optimal(sol);
  CHECK(sol.primal_value == doctest::Approx(0.7).epsilon(1e-7));
  CHECK(sol.x[0] == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("inconsistent equalities are certified infeasible") {
  LinearProgram lp;
  lp.resize(1);
  const int k = lp.add_row(-1.0);  // x = -1 with x >= 0
  lp.add_row_entry(k, 0, 1.0);

  const Solution sol = dirk::solve_lp(lp);
  CHECK(sol.status == SolveStatus::Infeasible);
  CHECK(sol.detail.find("primal infeasible") != std::string::npos);
  // Farkas certificate: y with A^t y <= 0 and b.y > 0
  REQUIRE(sol.y.size() == 1);
  CHECK(sol.y[0] < 0);
}

TEST_CASE("unbounded objectives are certified") {
  LinearProgram lp;
  lp.resize(1);
  lp.maximize = true;
  lp.objective = {1};

  const Solution sol = dirk::solve_lp(lp);
  CHECK(sol.status == SolveStatus::Infeasible);
  CHECK(sol.detail.find("unbounded") != std::string::npos);
}

TEST_CASE("free variables reach both signs") {
  // x free, y,z >= 0, with x - y = -3 and x + z = 5, i.e. x in [-3, 5]
  LinearProgram lp;
  lp.resize(3);
  lp.nonnegative = {false, true, true};
  lp.objective = {1, 0, 0};
  int k = lp.add_row(-3.0);
  lp.add_row_entry(k, 0, 1.0);
  lp.add_row_entry(k, 1, -1.0);
  k = lp.add_row(5.0);
  lp.add_row_entry(k, 0, 1.0);
  lp.add_row_entry(k, 2, 1.0);

  const Solution lo = dirk::solve_lp(lp);
  require_optimal(lo);
  CHECK(lo.primal_value == doctest::Approx(-3.0).epsilon(1e-8));
  CHECK(lo.x[0] == doctest::Approx(-3.0).epsilon(1e-7));

  lp.maximize = true;
  const Solution hi = dirk::solve_lp(lp);
  require_optimal(hi);
  CHECK(hi.primal_value == doctest::Approx(5.0).epsilon(1e-8));
  CHECK(hi.x[0] == doctest::Approx(5.0).epsilon(1e-7));
}

TEST_CASE("random primal-dual feasible linear programs obey weak duality") {
  std::mt19937 rng(20260815);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.1, 1.1);

  for (int trial = 0; trial < 20; ++trial) {
    const int n = 6, m = 4;
    LinearProgram lp;
    lp.resize(n);
    lp.nonnegative = {false, false, true, true, true, true};
    Eigen::MatrixXd a(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = unit(rng);

    // primal point: free entries arbitrary, sign-constrained ones interior
    Eigen::VectorXd x0(n);
    for (int j = 0; j < n; ++j) x0[j] = lp.nonnegative[j] ? pos(rng) : unit(rng);
    const Eigen::VectorXd b = a * x0;
    // dual point: c = A^t y0 + s0 with s0 = 0 on free variables
    Eigen::VectorXd y0(m);
    for (int i = 0; i < m; ++i) y0[i] = unit(rng);
    Eigen::VectorXd c = a.transpose() * y0;
    for (int j = 0; j < n; ++j)
      if (lp.nonnegative[j]) c[j] += pos(rng);

    for (int j = 0; j < n; ++j) lp.objective[j] = c[j];
    for (int i = 0; i < m; ++i) {
      const int k = lp.add_row(b[i]);
      for (int j = 0; j < n; ++j) lp.add_row_entry(k, j, a(i, j));
    }

    const Solution sol = dirk::solve_lp(lp);
    require_optimal(sol);
    CHECK(sol.primal_value >= sol.dual_value - 1e-6);
    CHECK(sol.gap <= 1e-6 * (1 + std::abs(sol.primal_value)));
    // returned point satisfies the equalities
    Eigen::VectorXd x(n);
    for (int j = 0; j < n; ++j) x[j] = sol.x[j];
    CHECK((a * x - b).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("trace-normalized block maximizes its trace") {
  SemidefiniteProgram sdp;
  sdp.set_blocks({2});
  sdp.maximize = true;
  sdp.add_objective_entry(0, 0, 0, 1.0);
  sdp.add_objective_entry(0, 1, 1, 1.0);
  const int k = sdp.add_constraint(1.0);
  sdp.add_constraint_entry(k, 0, 0, 0, 1.0);
  sdp.add_constraint_entry(k, 0, 1, 1, 1.0);

  const Solution sol = dirk::solve_sdp(sdp);
  require_optimal(sol);
  CHECK(sol.primal_value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.dual_value == doctest::Approx(1.0).epsilon(1e-6));
  REQUIRE(sol.primal_blocks.size() == 1);
  CHECK(sol.primal_blocks[0].trace() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("off-diagonal coupling saturates the psd cone") {
  const Solution sol = dirk::solve_sdp(coupling_sdp());
  require_optimal(sol);
  CHECK(sol.primal_value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.primal_blocks[0](0, 1) == doctest::Approx(0.5).epsilon(1e-5));
  // the cone membership may be violated only at noise level
  const double scale = 1 + sol.primal_blocks[0].cwiseAbs().maxCoeff();
  CHECK(min_eigenvalue(sol.primal_blocks[0]) >= -1e-8 * scale);
  CHECK(min_eigenvalue(sol.dual_blocks[0]) >= -1e-8 * scale);
}

TEST_CASE("constraints may couple several blocks") {
  SemidefiniteProgram sdp;
  sdp.set_blocks({2, 2});
  sdp.maximize = true;
  sdp.add_objective_entry(0, 0, 1, 1.0);
  int k = sdp.add_constraint(0.0);  // tr X0 - tr X1 = 0
  sdp.add_constraint_entry(k, 0, 0, 0, 1.0);
  sdp.add_constraint_entry(k, 0, 1, 1, 1.0);
  sdp.add_constraint_entry(k, 1, 0, 0, -1.0);
  sdp.add_constraint_entry(k, 1, 1, 1, -1.0);
  k = sdp.add_constraint(1.0);  // tr X0 + tr X1 = 1
  sdp.add_constraint_entry(k, 0, 0, 0, 1.0);
  sdp.add_constraint_entry(k, 0, 1, 1, 1.0);
  sdp.add_constraint_entry(k, 1, 0, 0, 1.0);
  sdp.add_constraint_entry(k, 1, 1, 1, 1.0);

  const Solution sol = dirk::solve_sdp(sdp);
  require_optimal(sol);
  // tr X0 = 1/2, so X01 + X10 is at most 1/2
  CHECK(sol.primal_value == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("psd infeasibility is certified") {
  SemidefiniteProgram sdp;
  sdp.set_blocks({2});
  const int k = sdp.add_constraint(-1.0);  // X00 = -1 contradicts psd
  sdp.add_constraint_entry(k, 0, 0, 0, 1.0);

  const Solution sol = dirk::solve_sdp(sdp);
  CHECK(sol.status == SolveStatus::Infeasible);
  CHECK(sol.detail.find("primal infeasible") != std::string::npos);
}

TEST_CASE("psd unbounded growth is certified") {
  SemidefiniteProgram sdp;
  sdp.set_blocks({2});
  sdp.maximize = true;
  sdp.add_objective_entry(0, 0, 0, 1.0);

  const Solution sol = dirk::solve_sdp(sdp);
  CHECK(sol.status == SolveStatus::Infeasible);
  CHECK(sol.detail.find("unbounded") != std::string::npos);
}

TEST_CASE("random primal-dual feasible sdps obey weak duality") {
  std::mt19937 rng(987654321);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3, m = 3;
    SemidefiniteProgram sdp;
    sdp.set_blocks({n});

    std::vector<Eigen::MatrixXd> a(m);
    Eigen::MatrixXd r(n, n), q(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        r(i, j) = unit(rng);
        q(i, j) = unit(rng);
      }
    const Eigen::MatrixXd x0 =
        r * r.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd s0 =
        q * q.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);

    Eigen::VectorXd y0(m);
    Eigen::MatrixXd c = s0;
    for (int kk = 0; kk < m; ++kk) {
      a[kk].setZero(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          const double v = unit(rng);
          a[kk](i, j) += v;
          if (i != j) a[kk](j, i) += v;
        }
      y0[kk] = unit(rng);
      c += y0[kk] * a[kk];

      const int k = sdp.add_constraint((a[kk].array() * x0.array()).sum());
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
          if (a[kk](i, j) != 0.0) sdp.add_constraint_entry(k, 0, i, j, a[kk](i, j));
    }
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        if (c(i, j) != 0.0) sdp.add_objective_entry(0, i, j, c(i, j));

    const Solution sol = dirk::solve_sdp(sdp);
    require_optimal(sol);
    CHECK(sol.primal_value >= sol.dual_value - 1e-5);
    CHECK(sol.gap <= 1e-5 * (1 + std::abs(sol.primal_value)));
    const double scale = 1 + sol.primal_blocks[0].cwiseAbs().maxCoeff();
    CHECK(min_eigenvalue(sol.primal_blocks[0]) >= -1e-8 * scale);
    for (int kk = 0; kk < m; ++kk) {
      const double lhs = (a[kk].array() * sol.primal_blocks[0].array()).sum();
      CHECK(lhs == doctest::Approx(sdp.rhs[kk]).epsilon(1e-5));
    }
  }
}

TEST_CASE("solves are bitwise reproducible") {
  const Solution lp1 = dirk::solve_lp(pinned_simplex());
  const Solution lp2 = dirk::solve_lp(pinned_simplex());
  CHECK(lp1.primal_value == lp2.primal_value);
  CHECK(lp1.dual_value == lp2.dual_value);
  CHECK(lp1.iterations == lp2.iterations);
  REQUIRE(lp1.x.size() == lp2.x.size());
  for (std::size_t i = 0; i < lp1.x.size(); ++i) CHECK(lp1.x[i] == lp2.x[i]);

  const Solution sdp1 = dirk::solve_sdp(coupling_sdp());
  const Solution sdp2 = dirk::solve_sdp(coupling_sdp());
  CHECK(sdp1.primal_value == sdp2.primal_value);
  CHECK(sdp1.iterations == sdp2.iterations);
  CHECK((sdp1.primal_blocks[0] - sdp2.primal_blocks[0]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("malformed programs are rejected") {
  LinearProgram lp;
  lp.resize(2);
  lp.objective.pop_back();
  CHECK_THROWS_AS(dirk::solve_lp(lp), std::invalid_argument);

  LinearProgram bad_row;
  bad_row.resize(1);
  const int k = bad_row.add_row(0.0);
  bad_row.add_row_entry(k, 3, 1.0);
  CHECK_THROWS_AS(dirk::solve_lp(bad_row), std::invalid_argument);

  LinearProgram nan_rhs;
  nan_rhs.resize(1);
  nan_rhs.add_row(std::nan(""));
  CHECK_THROWS_AS(dirk::solve_lp(nan_rhs), std::invalid_argument);

  SemidefiniteProgram sdp;
  sdp.set_blocks({2});
  const int c = sdp.add_constraint(1.0);
  sdp.add_constraint_entry(c, 0, 2, 0, 1.0);  // row index outside the block
  CHECK_THROWS_AS(dirk::solve_sdp(sdp), std::invalid_argument);

  SemidefiniteProgram neg;
  neg.set_blocks({-1});
  CHECK_THROWS_AS(dirk::validate(neg), std::invalid_argument);
}

TEST_CASE("problems survive a json round trip") {
  const LinearProgram lp = pinned_simplex();
  const std::string lp_text = dirk::lp_to_json(lp);
  const LinearProgram lp_back = dirk::lp_from_json(lp_text);
  const Solution a = dirk::solve_lp(lp);
  const Solution b = dirk::solve_lp(lp_back);
  CHECK(a.primal_value == b.primal_value);
  CHECK(a.iterations == b.iterations);

  const SemidefiniteProgram sdp = coupling_sdp();
  const std::string sdp_text = dirk::sdp_to_json(sdp);
  const SemidefiniteProgram sdp_back = dirk::sdp_from_json(sdp_text);
  const Solution c = dirk::solve_sdp(sdp);
  const Solution d = dirk::solve_sdp(sdp_back);
  CHECK(c.primal_value == d.primal_value);

  CHECK_THROWS_AS(dirk::lp_from_json("not json at all"), std::invalid_argument);
  CHECK_THROWS_AS(dirk::lp_from_json(sdp_text), std::invalid_argument);
  CHECK_THROWS_AS(dirk::sdp_from_json(lp_text), std::invalid_argument);
  CHECK_THROWS_AS(dirk::sdp_from_json(R"({"type":"sdp"})"), std::invalid_argument);
}
