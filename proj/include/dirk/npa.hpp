#pragma once

// Guessing-probability SDP relaxations.
//
// The eavesdropper is modeled by outcome-indexed subnormalized moment-matrix
// blocks: for each of the 2^k joint outcomes e of the k guessed observables
// there is one PSD block Γ^e over a fixed monomial basis, with
//   Γ^e[u,v] = tr ρ_e · u†v        (ρ_e subnormalized, Σ_e tr ρ_e = 1).
// Entries whose canonical product coincides (as a *-algebra element, up to
// adjoint) are tied by equality constraints inside every block; Bell-expression
// values are pinned on the sum of blocks; the guessing probability
//   Σ_e tr ρ_e Π_i (1 + s_i(e) X_i)/2
// expands into 2^k signed moment terms per block and is maximized.  The SDP
// optimum upper-bounds the quantum guessing probability at the chosen level.

#include <string>
#include <map>
#include <utility>
#include <vector>

#include "dirk/bell_algebra.hpp"
#include "dirk/conic_solver.hpp"

namespace dirk {

// Moment-matrix indexing over the monomial basis of a level: which cells share
// a moment, and which canonical monomials are representable as u†v.
class MomentStructure {
 public:
  explicit MomentStructure(const LevelSpec& level);

  int n_parties() const { return level_.n_parties; }
  const LevelSpec& level() const { return level_; }
  int size() const { return static_cast<int>(monomials_.size()); }
  const std::vector<Monomial>& monomials() const { return monomials_; }

  // Row index of a monomial in the basis, -1 when absent.
  int index_of(const Monomial& m) const;

  int n_classes() const { return static_cast<int>(class_reps_.size()); }
  // Moment class of the cell (row, col): the class of canonical(row† · col).
  int entry_class(int row, int col) const {
    return cell_class_[static_cast<std::size_t>(row) * monomials_.size() + col];
  }
  // Canonical representative (min of w and w†) and first upper-triangle cell.
  const Monomial& class_representative(int id) const { return class_reps_.at(id); }
  std::pair<int, int> class_anchor(int id) const { return anchors_.at(id); }
  // Moment class of an arbitrary canonical monomial, -1 when it is not
  // representable as u†v at this level.
  int class_of(const Monomial& m) const;

 private:
  LevelSpec level_;
  std::vector<Monomial> monomials_;
  std::vector<int> cell_class_;
  std::vector<Monomial> class_reps_;
  std::vector<std::pair<int, int>> anchors_;
  std::map<Monomial, int> class_index_;
};

MomentStructure build_moment_structure(const LevelSpec& level);

// Which observables the eavesdropper tries to guess jointly, e.g. {A1},
// {A1, B1}, {A1, B1, C1} or {A2, B2, C2}.  One party may appear only once.
struct GuessingScenario {
  int n_parties = 3;
  std::vector<PartyObservable> guessed;

  int n_outcomes() const { return 1 << guessed.size(); }
  // Sign of the i-th guessed observable in Eve outcome e (bit i of e).
  static int outcome_sign(int e, int i) { return (e >> i) & 1 ? -1 : 1; }

  void validate() const;
  // "A1", "A1B1", "A2B2C2", ... (letters name parties in order).
  static GuessingScenario parse(std::string_view text, int n_parties);
  std::string str() const;
};

struct PinnedExpression {
  BellExpression expression;
  double value = 0.0;
};

// Assemble the relaxation: one PSD block of size |level| per Eve outcome;
// constraints are (i) intra-block shared-moment equalities, (ii) total
// normalization Σ_e Γ^e[1,1] = 1, (iii) one pinned Bell value per entry of
// `pins`, applied to the block sum.  Throws std::invalid_argument naming any
// required monomial that the level cannot represent.
SemidefiniteProgram build_guessing_relaxation(const GuessingScenario& sc,
                                              const LevelSpec& level,
                                              const std::vector<PinnedExpression>& pins);

struct GpBound {
  double value = 0.0;
  SolveStatus status = SolveStatus::NumericalLimit;
  double gap = 0.0;
  int iterations = 0;
  std::string detail;
};

GpBound gp_bound(const GuessingScenario& sc, const LevelSpec& level,
                 const std::vector<PinnedExpression>& pins, double tolerance = 1e-7);

// The SDP optimum; throws std::runtime_error unless the solve converged (a
// numerical stop with duality gap below 1e-6 is accepted as converged).
double gp_upper_bound(const GuessingScenario& sc, const LevelSpec& level,
                      const std::vector<PinnedExpression>& pins,
                      double tolerance = 1e-7);

// One sweep point: `violation` is the caller's curve parameter, `targets`
// holds one pinned value per swept expression.
struct SweepTask {
  double violation = 0.0;
  std::vector<double> targets;
};

struct SweepPoint {
  double violation = 0.0;
  double bound = 0.0;         // NaN when the point failed
  std::string status;         // "optimal" | "approx" | "infeasible" | "failed"
  double gap = 0.0;
};

// Solves one relaxation per task (pins[i] = (expressions[i], task.targets[i])),
// distributing points over `jobs` threads; the result order follows the task
// order regardless of scheduling.  Per-point solver failures are reported in
// the status field and do not stop the sweep.
std::vector<SweepPoint> sweep_curve(const GuessingScenario& sc, const LevelSpec& level,
                                    const std::vector<BellExpression>& expressions,
                                    const std::vector<SweepTask>& grid, int jobs = 1,
                                    double tolerance = 1e-7);

}  // namespace dirk
