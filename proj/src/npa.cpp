#include "dirk/npa.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace dirk {
namespace {

Monomial class_key(const Monomial& w) {
  Monomial adj = w.adjoint();
  return adj < w ? adj : w;
}

}  // namespace

MomentStructure::MomentStructure(const LevelSpec& level)
    : level_(level), monomials_(enumerate_monomials(level)) {
  const int n = size();
  cell_class_.assign(static_cast<std::size_t>(n) * n, -1);
  for (int r = 0; r < n; ++r)
    for (int c = r; c < n; ++c) {
      const Monomial key = class_key(monomials_[r].adjoint() * monomials_[c]);
      auto [it, inserted] = class_index_.try_emplace(key, n_classes());
      if (inserted) {
        class_reps_.push_back(key);
        anchors_.push_back({r, c});
      }
      cell_class_[static_cast<std::size_t>(r) * n + c] = it->second;
      cell_class_[static_cast<std::size_t>(c) * n + r] = it->second;
    }
}

int MomentStructure::index_of(const Monomial& m) const {
  const auto it = std::lower_bound(monomials_.begin(), monomials_.end(), m);
  if (it == monomials_.end() || !(*it == m)) return -1;
  return static_cast<int>(it - monomials_.begin());
}

int MomentStructure::class_of(const Monomial& m) const {
  const auto it = class_index_.find(class_key(m));
  return it == class_index_.end() ? -1 : it->second;
}

MomentStructure build_moment_structure(const LevelSpec& level) {
  return MomentStructure(level);
}

void GuessingScenario::validate() const {
  if (n_parties < 1 || n_parties > kMaxParties)
    throw std::invalid_argument("unsupported party count");
  if (guessed.empty() || guessed.size() > 8)
    throw std::invalid_argument("between 1 and 8 guessed observables required");
  for (std::size_t i = 0; i < guessed.size(); ++i) {
    const auto& g = guessed[i];
    if (g.party < 0 || g.party >= n_parties)
      throw std::invalid_argument("guessed party out of range");
    if (g.setting < 1) throw std::invalid_argument("settings are 1-based");
    for (std::size_t j = 0; j < i; ++j)
      if (guessed[j].party == g.party)
        throw std::invalid_argument("a party may be guessed only once");
  }
}

GuessingScenario GuessingScenario::parse(std::string_view text, int n_parties) {
  GuessingScenario sc;
  sc.n_parties = n_parties;
  std::size_t i = 0;
  while (i < text.size()) {
    const char letter = text[i];
    if (letter < 'A' || letter > 'H')
      throw std::invalid_argument("bad guessed-observable spec: " + std::string(text));
    ++i;
    int setting = 0;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
      setting = setting * 10 + (text[i] - '0');
      ++i;
    }
    if (setting == 0)
      throw std::invalid_argument("missing setting digit in: " + std::string(text));
    sc.guessed.push_back({letter - 'A', setting});
  }
  sc.validate();
  return sc;
}

std::string GuessingScenario::str() const {
  std::string out;
  for (const auto& g : guessed) {
    out += static_cast<char>('A' + g.party);
    out += std::to_string(g.setting);
  }
  return out;
}

namespace {

struct Slot {
  int row = 0;
  int col = 0;
  double weight = 1.0;  // off-diagonal SymEntry values count twice
};

Slot class_slot(const MomentStructure& ms, int cls) {
  const auto [r, c] = ms.class_anchor(cls);
  return {r, c, r == c ? 1.0 : 0.5};
}

// Anchor slot of a monomial's moment class; throws naming the monomial when
// the level cannot express it.
Slot monomial_slot(const MomentStructure& ms, const Monomial& m) {
  const int cls = ms.class_of(m);
  if (cls < 0)
    throw std::invalid_argument("monomial " + m.str() + " is not representable at level " +
                                ms.level().str());
  return class_slot(ms, cls);
}

}  // namespace

SemidefiniteProgram build_guessing_relaxation(const GuessingScenario& sc,
                                              const LevelSpec& level,
                                              const std::vector<PinnedExpression>& pins) {
  sc.validate();
  if (level.n_parties != sc.n_parties)
    throw std::invalid_argument("level and scenario party counts differ");
  const MomentStructure ms(level);
  const int n = ms.size();
  const int n_blocks = sc.n_outcomes();

  SemidefiniteProgram sdp;
  sdp.maximize = true;
  sdp.set_blocks(std::vector<int>(n_blocks, n));

  // (i) cells sharing a moment are equal within every block
  for (int b = 0; b < n_blocks; ++b)
    for (int r = 0; r < n; ++r)
      for (int c = r; c < n; ++c) {
        const int cls = ms.entry_class(r, c);
        const auto [ar, ac] = ms.class_anchor(cls);
        if (ar == r && ac == c) continue;
        const int k = sdp.add_constraint(0.0);
        sdp.add_constraint_entry(k, b, r, c, r == c ? 1.0 : 0.5);
        sdp.add_constraint_entry(k, b, ar, ac, ar == ac ? -1.0 : -0.5);
      }

  // (ii) the subnormalized blocks sum to a normalized state
  const int norm = sdp.add_constraint(1.0);
  for (int b = 0; b < n_blocks; ++b) sdp.add_constraint_entry(norm, b, 0, 0, 1.0);

  // (iii) Bell values pinned on the block sum
  for (const auto& pin : pins) {
    if (pin.expression.n_parties() != sc.n_parties)
      throw std::invalid_argument("pinned expression party count differs");
    const int k = sdp.add_constraint(pin.value);
    for (const auto& [m, coeff] : pin.expression.terms()) {
      const Slot s = monomial_slot(ms, m);
      for (int b = 0; b < n_blocks; ++b)
        sdp.add_constraint_entry(k, b, s.row, s.col, coeff * s.weight);
    }
  }

  // objective: Σ_e tr ρ_e Π_i (1 + s_i(e) X_i)/2, expanded over subsets
  const int k_guessed = static_cast<int>(sc.guessed.size());
  const double scale = 1.0 / n_blocks;
  for (int e = 0; e < n_blocks; ++e)
    for (int subset = 0; subset < n_blocks; ++subset) {
      Monomial m = Monomial::identity(sc.n_parties);
      int sign = 1;
      for (int i = 0; i < k_guessed; ++i)
        if ((subset >> i) & 1) {
          m = m * Monomial::single(sc.guessed[i], sc.n_parties);
          sign *= GuessingScenario::outcome_sign(e, i);
        }
      const Slot s = monomial_slot(ms, m);
      sdp.add_objective_entry(e, s.row, s.col, scale * sign * s.weight);
    }
  return sdp;
}

GpBound gp_bound(const GuessingScenario& sc, const LevelSpec& level,
                 const std::vector<PinnedExpression>& pins, double tolerance) {
  const SemidefiniteProgram sdp = build_guessing_relaxation(sc, level, pins);
  const Solution sol = solve_sdp(sdp, tolerance);
  GpBound out;
  out.value = sol.primal_value;
  out.status = sol.status;
  out.gap = sol.gap;
  out.iterations = sol.iterations;
  out.detail = sol.detail;
  return out;
}

double gp_upper_bound(const GuessingScenario& sc, const LevelSpec& level,
                      const std::vector<PinnedExpression>& pins, double tolerance) {
  const GpBound b = gp_bound(sc, level, pins, tolerance);
  if (b.status == SolveStatus::Optimal) return b.value;
  // accept a numerical stop only if it stopped essentially converged
  if (b.status == SolveStatus::NumericalLimit && b.gap <= 1e-6) return b.value;
  throw std::runtime_error("guessing-probability relaxation did not converge: " +
                           (b.detail.empty() ? std::string("infeasible") : b.detail));
}

std::vector<SweepPoint> sweep_curve(const GuessingScenario& sc, const LevelSpec& level,
                                    const std::vector<BellExpression>& expressions,
                                    const std::vector<SweepTask>& grid, int jobs,
                                    double tolerance) {
  for (const auto& task : grid)
    if (task.targets.size() != expressions.size())
      throw std::invalid_argument("sweep task target count differs from expression count");

  std::vector<SweepPoint> out(grid.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr config_error;
  std::mutex error_mutex;

  const auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < grid.size(); i = next.fetch_add(1)) {
      SweepPoint& pt = out[i];
      pt.violation = grid[i].violation;
      std::vector<PinnedExpression> pins;
      pins.reserve(expressions.size());
      for (std::size_t j = 0; j < expressions.size(); ++j)
        pins.push_back({expressions[j], grid[i].targets[j]});
      try {
        const GpBound b = gp_bound(sc, level, pins, tolerance);
        pt.gap = b.gap;
        switch (b.status) {
          case SolveStatus::Optimal:
            pt.bound = b.value;
            pt.status = "optimal";
            break;
          case SolveStatus::NumericalLimit:
            pt.bound = b.value;
            pt.status = b.gap <= 1e-6 ? "approx" : "failed";
            break;
          case SolveStatus::Infeasible:
            pt.bound = std::numeric_limits<double>::quiet_NaN();
            pt.status = "infeasible";
            break;
        }
      } catch (...) {
        // malformed scenario/level: affects every point, surface it
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!config_error) config_error = std::current_exception();
        return;
      }
    }
  };

  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(grid.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (config_error) std::rethrow_exception(config_error);
  return out;
}

}  // namespace dirk
