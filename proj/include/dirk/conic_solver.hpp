#pragma once

// Self-contained linear and semidefinite programming layer.
//
// Both problem kinds are solved in standard conic form
//     minimize <C, X>   s.t.  <A_k, X> = b_k,  X in K,
// where K is a product of PSD blocks and a nonnegative orthant, by a
// homogeneous self-dual interior-point method (HKM direction, Mehrotra
// predictor-corrector).  Maximization is a stored flag; values are reported
// in the caller's sense.  The solver is deterministic: fixed starting point,
// fixed iteration schedule, no randomization, single-threaded per instance.

#include <Eigen/Dense>

#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dirk {

enum class SolveStatus { Optimal, Infeasible, NumericalLimit };

struct Solution {
  SolveStatus status = SolveStatus::NumericalLimit;
  std::string detail;  // human-readable qualifier, e.g. which side is infeasible
  double primal_value = std::numeric_limits<double>::quiet_NaN();
  double dual_value = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::infinity();  // |primal-dual| achieved
  int iterations = 0;
  std::vector<double> x;  // LP primal variables (original indexing)
  std::vector<double> y;  // equality-constraint multipliers
  std::vector<Eigen::MatrixXd> primal_blocks;  // SDP primal iterate X
  std::vector<Eigen::MatrixXd> dual_blocks;    // SDP dual slack iterate S
};

// One symmetric entry: contributes `value` at (row, col) and (col, row).
struct SymEntry {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

struct SemidefiniteProgram {
  std::vector<int> block_sizes;
  bool maximize = false;
  // objective[b] and constraints[k][b] list the entries of block b.
  std::vector<std::vector<SymEntry>> objective;
  std::vector<std::vector<std::vector<SymEntry>>> constraints;
  std::vector<double> rhs;

  // convenience builders
  void set_blocks(std::vector<int> sizes) {
    block_sizes = std::move(sizes);
    objective.assign(block_sizes.size(), {});
  }
  void add_objective_entry(int block, int row, int col, double value) {
    objective[block].push_back({row, col, value});
  }
  // returns the new constraint's index
  int add_constraint(double b) {
    constraints.emplace_back(block_sizes.size());
    rhs.push_back(b);
    return static_cast<int>(rhs.size()) - 1;
  }
  void add_constraint_entry(int k, int block, int row, int col, double value) {
    constraints[k][block].push_back({row, col, value});
  }
};

struct LinearProgram {
  int n_vars = 0;
  bool maximize = false;
  std::vector<double> objective;  // size n_vars
  std::vector<std::vector<std::pair<int, double>>> rows;  // sparse equality rows
  std::vector<double> rhs;
  std::vector<bool> nonnegative;  // per variable; false means free (split internally)

  void resize(int n) {
    n_vars = n;
    objective.assign(n, 0.0);
    nonnegative.assign(n, true);
  }
  int add_row(double b) {
    rows.emplace_back();
    rhs.push_back(b);
    return static_cast<int>(rhs.size()) - 1;
  }
  void add_row_entry(int row, int var, double coeff) {
    rows[row].push_back({var, coeff});
  }
};

// Throws std::invalid_argument on inconsistent dimensions or nonfinite data.
void validate(const LinearProgram& p);
void validate(const SemidefiniteProgram& p);

Solution solve_lp(const LinearProgram& p, double tolerance = 1e-9);
Solution solve_sdp(const SemidefiniteProgram& p, double tolerance = 1e-7);

// Problem dump/load for debugging and cross-solver comparison.
std::string lp_to_json(const LinearProgram& p);
LinearProgram lp_from_json(std::string_view text);
std::string sdp_to_json(const SemidefiniteProgram& p);
SemidefiniteProgram sdp_from_json(std::string_view text);

}  // namespace dirk
