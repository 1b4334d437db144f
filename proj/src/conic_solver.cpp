#include "dirk/conic_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include "json.hpp"

namespace dirk {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxIterations = 200;
constexpr double kStepDamping = 0.98;

bool finite(double v) { return std::isfinite(v); }

MatrixXd densify(const std::vector<SymEntry>& entries, int n) {
  MatrixXd m = MatrixXd::Zero(n, n);
  for (const auto& e : entries) {
    m(e.row, e.col) += e.value;
    if (e.row != e.col) m(e.col, e.row) += e.value;
  }
  return m;
}

// <A, T> for symmetric sparse A and an arbitrary (not necessarily symmetric)
// dense T; equals <A, (T + T^t)/2>.
double sym_dot(const std::vector<SymEntry>& a, const MatrixXd& t) {
  double r = 0;
  for (const auto& e : a)
    r += e.row == e.col ? e.value * t(e.row, e.row)
                        : e.value * (t(e.row, e.col) + t(e.col, e.row));
  return r;
}

// dst += scale * A for symmetric sparse A
void add_scaled(MatrixXd* dst, const std::vector<SymEntry>& a, double scale) {
  for (const auto& e : a) {
    (*dst)(e.row, e.col) += scale * e.value;
    if (e.row != e.col) (*dst)(e.col, e.row) += scale * e.value;
  }
}

// t = left * A * right for symmetric sparse A, via rank-one accumulation
void sandwich(const std::vector<SymEntry>& a, const MatrixXd& left,
              const MatrixXd& right, MatrixXd* t) {
  t->setZero(left.rows(), right.cols());
  for (const auto& e : a) {
    t->noalias() += e.value * left.col(e.row) * right.row(e.col);
    if (e.row != e.col) t->noalias() += e.value * left.col(e.col) * right.row(e.row);
  }
}

// ---- internal standard form: min <c,x>, Ax = b, x in PSD blocks x R+^n ------

struct ConeProblem {
  std::vector<int> block_sizes;
  int n_scalar = 0;

  std::vector<MatrixXd> c_blocks;
  VectorXd c_scalar;
  VectorXd b;

  struct BlockEntry {
    int constraint = 0;
    std::vector<SymEntry> entries;
  };
  // per block: the constraints touching it
  std::vector<std::vector<BlockEntry>> by_block;
  // per scalar variable: (constraint, coefficient)
  std::vector<std::vector<std::pair<int, double>>> scalar_cols;

  int m() const { return static_cast<int>(b.size()); }
  int n_blocks() const { return static_cast<int>(block_sizes.size()); }
  double barrier_dim() const {
    double n = n_scalar;
    for (int s : block_sizes) n += s;
    return n;
  }
};

class HsdSolver {
 public:
  HsdSolver(const ConeProblem& p, double tol) : p_(p), tol_(tol) {
    bnorm_ = 1.0;
    for (int k = 0; k < p_.m(); ++k) bnorm_ = std::max(bnorm_, 1 + std::abs(p_.b[k]));
    cnorm_ = 1.0;
    for (const auto& c : p_.c_blocks)
      if (c.size() > 0) cnorm_ = std::max(cnorm_, 1 + c.cwiseAbs().maxCoeff());
    if (p_.n_scalar > 0)
      cnorm_ = std::max(cnorm_, 1 + p_.c_scalar.cwiseAbs().maxCoeff());
  }

  Solution run();

 private:
  struct Direction {
    std::vector<MatrixXd> X, S;
    VectorXd xs, ss, y;
    double tau = 0, kappa = 0;
  };

  void compute_residuals();
  bool factor_s();
  void build_schur();
  bool factor_schur();
  VectorXd schur_solve(const VectorXd& rhs) const;
  bool solve_newton(double eta, const std::vector<MatrixXd>& rc_blocks,
                    const VectorXd& rc_scalar, double rc_tau, Direction* d) const;
  double step_limit(const Direction& d) const;
  double trial_mu(const Direction& d, double alpha) const;
  Solution extract(SolveStatus status, std::string detail) const;

  const ConeProblem& p_;
  double tol_;
  double bnorm_ = 1, cnorm_ = 1;

  // iterate
  std::vector<MatrixXd> X_, S_;
  VectorXd xs_, ss_, y_;
  double tau_ = 1, kappa_ = 1;
  int iterations_ = 0;

  // per-iteration workspace
  std::vector<MatrixXd> Sinv_, res2_;
  VectorXd res1_, res2s_, sinv_;
  double res3_ = 0, cx_ = 0, by_ = 0, mu_ = 0;

  MatrixXd M_;
  VectorXd gvec_, v1_;
  double qc_ = 0, denom_ = 0;
  Eigen::LLT<MatrixXd> schur_llt_;
  Eigen::LDLT<MatrixXd> schur_ldlt_;
  bool schur_use_ldlt_ = false;
};

// Largest alpha with P + alpha*D still PSD (P positive definite, D symmetric).
double psd_step(const MatrixXd& P, const MatrixXd& D) {
  Eigen::LLT<MatrixXd> llt(P);
  if (llt.info() != Eigen::Success) return 0.0;
  const MatrixXd L = llt.matrixL();
  MatrixXd Y = L.triangularView<Eigen::Lower>().solve(D);
  Y = L.triangularView<Eigen::Lower>().solve(MatrixXd(Y.transpose()));
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(Y, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  return lmin < 0 ? -1.0 / lmin : kInf;
}

void HsdSolver::compute_residuals() {
  const int m = p_.m();
  cx_ = 0;
  for (int b = 0; b < p_.n_blocks(); ++b)
    cx_ += (p_.c_blocks[b].array() * X_[b].array()).sum();
  if (p_.n_scalar > 0) cx_ += p_.c_scalar.dot(xs_);
  by_ = p_.b.dot(y_);

  res1_ = -tau_ * p_.b;
  for (int b = 0; b < p_.n_blocks(); ++b)
    for (const auto& be : p_.by_block[b])
      res1_[be.constraint] += sym_dot(be.entries, X_[b]);
  for (int v = 0; v < p_.n_scalar; ++v)
    for (const auto& [k, a] : p_.scalar_cols[v]) res1_[k] += a * xs_[v];

  res2_.resize(p_.n_blocks());
  for (int b = 0; b < p_.n_blocks(); ++b) {
    res2_[b] = tau_ * p_.c_blocks[b] - S_[b];
    for (const auto& be : p_.by_block[b])
      add_scaled(&res2_[b], be.entries, -y_[be.constraint]);
  }
  res2s_.resize(p_.n_scalar);
  if (p_.n_scalar > 0) {
    res2s_ = tau_ * p_.c_scalar - ss_;
    for (int v = 0; v < p_.n_scalar; ++v)
      for (const auto& [k, a] : p_.scalar_cols[v]) res2s_[v] -= a * y_[k];
  }
  res3_ = by_ - cx_ - kappa_;

  double dot = tau_ * kappa_;
  for (int b = 0; b < p_.n_blocks(); ++b) dot += (X_[b].array() * S_[b].array()).sum();
  if (p_.n_scalar > 0) dot += xs_.dot(ss_);
  mu_ = dot / (p_.barrier_dim() + 1);
  (void)m;
}

bool HsdSolver::factor_s() {
  Sinv_.resize(p_.n_blocks());
  for (int b = 0; b < p_.n_blocks(); ++b) {
    Eigen::LLT<MatrixXd> llt(S_[b]);
    if (llt.info() != Eigen::Success) return false;
    Sinv_[b] = llt.solve(MatrixXd::Identity(p_.block_sizes[b], p_.block_sizes[b]));
  }
  sinv_.resize(p_.n_scalar);
  for (int v = 0; v < p_.n_scalar; ++v) {
    if (!(ss_[v] > 0)) return false;
    sinv_[v] = 1.0 / ss_[v];
  }
  return true;
}

void HsdSolver::build_schur() {
  const int m = p_.m();
  M_ = MatrixXd::Zero(m, m);
  gvec_ = VectorXd::Zero(m);
  qc_ = 0;

  MatrixXd t;
  for (int b = 0; b < p_.n_blocks(); ++b) {
    const auto& lst = p_.by_block[b];
    for (std::size_t i2 = 0; i2 < lst.size(); ++i2) {
      sandwich(lst[i2].entries, X_[b], Sinv_[b], &t);
      for (std::size_t i1 = 0; i1 <= i2; ++i1) {
        const double val = sym_dot(lst[i1].entries, t);
        const int j = lst[i1].constraint, k = lst[i2].constraint;
        M_(j, k) += val;
        if (j != k) M_(k, j) += val;
      }
    }
    if (p_.c_blocks[b].size() > 0 && p_.c_blocks[b].cwiseAbs().maxCoeff() > 0) {
      const MatrixXd u = X_[b] * p_.c_blocks[b] * Sinv_[b];
      for (const auto& be : lst) gvec_[be.constraint] += sym_dot(be.entries, u);
      qc_ += (p_.c_blocks[b].array() * u.array()).sum();
    }
  }
  for (int v = 0; v < p_.n_scalar; ++v) {
    const double w = xs_[v] * sinv_[v];
    const auto& col = p_.scalar_cols[v];
    for (std::size_t i2 = 0; i2 < col.size(); ++i2)
      for (std::size_t i1 = 0; i1 <= i2; ++i1) {
        const double val = w * col[i1].second * col[i2].second;
        const int j = col[i1].first, k = col[i2].first;
        M_(j, k) += val;
        if (j != k) M_(k, j) += val;
      }
    const double cw = p_.c_scalar[v] * w;
    if (cw != 0.0) {
      for (const auto& [k, a] : col) gvec_[k] += a * cw;
      qc_ += p_.c_scalar[v] * cw;
    }
  }
}

bool HsdSolver::factor_schur() {
  schur_use_ldlt_ = false;
  schur_llt_.compute(M_);
  if (schur_llt_.info() == Eigen::Success) return true;
  // Redundant constraints make M singular; a tiny diagonal shift with
  // iterative refinement in schur_solve recovers a usable direction.
  schur_use_ldlt_ = true;
  double scale = 1.0;
  if (M_.size() > 0) scale = std::max(scale, M_.diagonal().cwiseAbs().maxCoeff());
  const MatrixXd reg =
      M_ + (1e-12 * scale) * MatrixXd::Identity(M_.rows(), M_.cols());
  schur_ldlt_.compute(reg);
  return schur_ldlt_.info() == Eigen::Success;
}

VectorXd HsdSolver::schur_solve(const VectorXd& rhs) const {
  const auto backsolve = [&](const VectorXd& v) -> VectorXd {
    return schur_use_ldlt_ ? VectorXd(schur_ldlt_.solve(v))
                           : VectorXd(schur_llt_.solve(v));
  };
  VectorXd x = backsolve(rhs);
  for (int pass = 0; pass < 2; ++pass) {
    const VectorXd r = rhs - M_ * x;
    x += backsolve(r);
  }
  return x;
}

bool HsdSolver::solve_newton(double eta, const std::vector<MatrixXd>& rc_blocks,
                             const VectorXd& rc_scalar, double rc_tau,
                             Direction* d) const {
  const int m = p_.m();
  const int nb = p_.n_blocks();

  // right-hand sides of the linearized feasibility equations
  const VectorXd r1 = -eta * res1_;
  const double rg = -eta * res3_;

  // p_k = <A_k, Rc S^-1>, h_k = <A_k, X r2 S^-1>, q0 = <C, Rc S^-1>,
  // q2 = <C, X r2 S^-1>   (with r2 = -eta * res2)
  VectorXd pvec = VectorXd::Zero(m), hvec = VectorXd::Zero(m);
  double q0 = 0, q2 = 0;
  std::vector<MatrixXd> r2(nb);
  for (int b = 0; b < nb; ++b) {
    r2[b] = -eta * res2_[b];
    const MatrixXd pb = rc_blocks[b] * Sinv_[b];
    const MatrixXd hb = X_[b] * r2[b] * Sinv_[b];
    for (const auto& be : p_.by_block[b]) {
      pvec[be.constraint] += sym_dot(be.entries, pb);
      hvec[be.constraint] += sym_dot(be.entries, hb);
    }
    q0 += (p_.c_blocks[b].array() * pb.array()).sum();
    q2 += (p_.c_blocks[b].array() * hb.array()).sum();
  }
  VectorXd r2s(p_.n_scalar);
  for (int v = 0; v < p_.n_scalar; ++v) {
    r2s[v] = -eta * res2s_[v];
    const double pv = rc_scalar[v] * sinv_[v];
    const double hv = xs_[v] * r2s[v] * sinv_[v];
    for (const auto& [k, a] : p_.scalar_cols[v]) {
      pvec[k] += a * pv;
      hvec[k] += a * hv;
    }
    q0 += p_.c_scalar[v] * pv;
    q2 += p_.c_scalar[v] * hv;
  }

  const VectorXd v0 = schur_solve(r1 - pvec - hvec);
  const VectorXd bg = p_.b - gvec_;

  const double denom = denom_;
  if (!(denom > 0) || !finite(denom)) {
    if (std::getenv("DIRK_SOLVER_DEBUG"))
      std::fprintf(stderr,
                   "newton fail: denom=%g qc=%g k/t=%g mu=%g tau=%g kappa=%g\n",
                   denom, qc_, kappa_ / tau_, mu_, tau_, kappa_);
    return false;
  }
  const double dtau =
      (rg + q0 + q2 + rc_tau / tau_ - bg.dot(v0)) / denom;
  if (!finite(dtau)) {
    if (std::getenv("DIRK_SOLVER_DEBUG"))
      std::fprintf(stderr,
                   "newton dtau fail: rg=%g q0=%g q2=%g rct/t=%g bgv0=%g denom=%g\n",
                   rg, q0, q2, rc_tau / tau_, bg.dot(v0), denom);
    return false;
  }

  d->y = v0 + dtau * v1_;
  d->tau = dtau;
  d->kappa = (rc_tau - kappa_ * dtau) / tau_;

  d->S.resize(nb);
  d->X.resize(nb);
  for (int b = 0; b < nb; ++b) {
    MatrixXd ds = dtau * p_.c_blocks[b] - r2[b];
    for (const auto& be : p_.by_block[b])
      add_scaled(&ds, be.entries, -d->y[be.constraint]);
    const MatrixXd dx = (rc_blocks[b] - X_[b] * ds) * Sinv_[b];
    d->S[b] = std::move(ds);
    d->X[b] = 0.5 * (dx + dx.transpose());
  }
  d->ss.resize(p_.n_scalar);
  d->xs.resize(p_.n_scalar);
  for (int v = 0; v < p_.n_scalar; ++v) {
    double ds = dtau * p_.c_scalar[v] - r2s[v];
    for (const auto& [k, a] : p_.scalar_cols[v]) ds -= a * d->y[k];
    d->ss[v] = ds;
    d->xs[v] = (rc_scalar[v] - xs_[v] * ds) * sinv_[v];
  }
  return true;
}

double HsdSolver::step_limit(const Direction& d) const {
  double alpha = kInf;
  for (int b = 0; b < p_.n_blocks(); ++b) {
    alpha = std::min(alpha, psd_step(X_[b], d.X[b]));
    alpha = std::min(alpha, psd_step(S_[b], d.S[b]));
  }
  for (int v = 0; v < p_.n_scalar; ++v) {
    if (d.xs[v] < 0) alpha = std::min(alpha, -xs_[v] / d.xs[v]);
    if (d.ss[v] < 0) alpha = std::min(alpha, -ss_[v] / d.ss[v]);
  }
  if (d.tau < 0) alpha = std::min(alpha, -tau_ / d.tau);
  if (d.kappa < 0) alpha = std::min(alpha, -kappa_ / d.kappa);
  return alpha;
}

double HsdSolver::trial_mu(const Direction& d, double alpha) const {
  double dot = (tau_ + alpha * d.tau) * (kappa_ + alpha * d.kappa);
  for (int b = 0; b < p_.n_blocks(); ++b)
    dot += ((X_[b] + alpha * d.X[b]).array() * (S_[b] + alpha * d.S[b]).array()).sum();
  for (int v = 0; v < p_.n_scalar; ++v)
    dot += (xs_[v] + alpha * d.xs[v]) * (ss_[v] + alpha * d.ss[v]);
  return dot / (p_.barrier_dim() + 1);
}

Solution HsdSolver::extract(SolveStatus status, std::string detail) const {
  Solution sol;
  sol.status = status;
  sol.detail = std::move(detail);
  sol.iterations = iterations_;
  if (status == SolveStatus::Infeasible) {
    // expose the (unscaled) Farkas-type certificate
    sol.y.assign(y_.data(), y_.data() + y_.size());
    return sol;
  }
  const double inv = 1.0 / tau_;
  sol.primal_value = cx_ * inv;
  sol.dual_value = by_ * inv;
  sol.gap = std::abs(sol.primal_value - sol.dual_value);
  sol.y.assign(y_.data(), y_.data() + y_.size());
  for (auto& v : sol.y) v *= inv;
  sol.x.assign(xs_.data(), xs_.data() + xs_.size());
  for (auto& v : sol.x) v *= inv;
  sol.primal_blocks.reserve(p_.n_blocks());
  sol.dual_blocks.reserve(p_.n_blocks());
  for (int b = 0; b < p_.n_blocks(); ++b) {
    sol.primal_blocks.push_back(inv * X_[b]);
    sol.dual_blocks.push_back(inv * S_[b]);
  }
  return sol;
}

Solution HsdSolver::run() {
  const int nb = p_.n_blocks();
  X_.resize(nb);
  S_.resize(nb);
  for (int b = 0; b < nb; ++b) {
    X_[b] = MatrixXd::Identity(p_.block_sizes[b], p_.block_sizes[b]);
    S_[b] = X_[b];
  }
  xs_ = VectorXd::Ones(p_.n_scalar);
  ss_ = VectorXd::Ones(p_.n_scalar);
  y_ = VectorXd::Zero(p_.m());
  tau_ = kappa_ = 1.0;

  double best_mu = kInf;
  int stall = 0;

  const bool debug = std::getenv("DIRK_SOLVER_DEBUG") != nullptr;
  for (iterations_ = 0; iterations_ < kMaxIterations; ++iterations_) {
    compute_residuals();
    if (debug)
      std::fprintf(stderr, "it %d mu=%.3e tau=%.3e kappa=%.3e cx=%.3e by=%.3e\n",
                   iterations_, mu_, tau_, kappa_, cx_, by_);

    const double pobj = cx_ / tau_, dobj = by_ / tau_;
    const double relgap =
        std::abs(pobj - dobj) / (1 + std::max(std::abs(pobj), std::abs(dobj)));
    double pres = 0;
    for (int k = 0; k < p_.m(); ++k) pres = std::max(pres, std::abs(res1_[k]));
    pres /= tau_ * bnorm_;
    double dres = 0;
    for (int b = 0; b < nb; ++b)
      if (res2_[b].size() > 0) dres = std::max(dres, res2_[b].cwiseAbs().maxCoeff());
    if (p_.n_scalar > 0) dres = std::max(dres, res2s_.cwiseAbs().maxCoeff());
    dres /= tau_ * cnorm_;

    if (relgap <= tol_ && pres <= tol_ && dres <= tol_)
      return extract(SolveStatus::Optimal, "");

    if (tau_ < 1e-10 * std::max(1.0, kappa_)) {
      if (by_ > 1e-10 && by_ >= -cx_)
        return extract(SolveStatus::Infeasible, "primal infeasible");
      if (-cx_ > 1e-10)
        return extract(SolveStatus::Infeasible, "dual infeasible (primal unbounded)");
      return extract(SolveStatus::NumericalLimit, "tau collapsed without certificate");
    }
    if (mu_ < 0.9 * best_mu) {
      best_mu = mu_;
      stall = 0;
    } else if (++stall >= 10) {
      return extract(SolveStatus::NumericalLimit, "progress stalled");
    }

    if (!factor_s())
      return extract(SolveStatus::NumericalLimit, "dual slack factorization failed");
    build_schur();
    if (!factor_schur())
      return extract(SolveStatus::NumericalLimit, "Schur factorization failed");
    v1_ = schur_solve(p_.b + gvec_);
    // The direction denominator equals b'M^-1 b + (qc - g'M^-1 g) + kappa/tau
    // with every group nonnegative; evaluating the groups separately (and
    // clamping roundoff) avoids the cancellation that the expanded form
    // (b-g)'v1 + qc suffers once x/s ratios grow large.
    const VectorXd wb = schur_solve(p_.b);
    const VectorXd wg = schur_solve(gvec_);
    denom_ = std::max(p_.b.dot(wb), 0.0) + std::max(qc_ - gvec_.dot(wg), 0.0) +
             kappa_ / tau_;

    // predictor: pure affine direction
    std::vector<MatrixXd> rc(nb);
    for (int b = 0; b < nb; ++b) rc[b] = -X_[b] * S_[b];
    VectorXd rcs = -xs_.cwiseProduct(ss_);
    Direction aff;
    if (!solve_newton(1.0, rc, rcs, -tau_ * kappa_, &aff))
      return extract(SolveStatus::NumericalLimit, "Newton system degenerate");
    const double alpha_aff = std::min(1.0, step_limit(aff));
    const double mu_aff = trial_mu(aff, alpha_aff);
    double sigma = std::pow(std::max(0.0, mu_aff / mu_), 3);
    sigma = std::min(1.0, sigma);

    // corrector: centering plus second-order term
    for (int b = 0; b < nb; ++b) {
      rc[b] = -X_[b] * S_[b] - aff.X[b] * aff.S[b];
      rc[b].diagonal().array() += sigma * mu_;
    }
    rcs = -xs_.cwiseProduct(ss_) - aff.xs.cwiseProduct(aff.ss);
    rcs.array() += sigma * mu_;
    const double rct = sigma * mu_ - tau_ * kappa_ - aff.tau * aff.kappa;
    Direction dir;
    if (!solve_newton(1.0 - sigma, rc, rcs, rct, &dir))
      return extract(SolveStatus::NumericalLimit, "Newton system degenerate");

    const double alpha = std::min(1.0, kStepDamping * step_limit(dir));
    if (!(alpha > 1e-10))
      return extract(SolveStatus::NumericalLimit, "step length collapsed");

    for (int b = 0; b < nb; ++b) {
      X_[b] += alpha * dir.X[b];
      S_[b] += alpha * dir.S[b];
    }
    xs_ += alpha * dir.xs;
    ss_ += alpha * dir.ss;
    y_ += alpha * dir.y;
    tau_ += alpha * dir.tau;
    kappa_ += alpha * dir.kappa;
  }
  compute_residuals();
  return extract(SolveStatus::NumericalLimit, "iteration limit reached");
}

// ---- public problem forms -> internal cone form ------------------------------

ConeProblem to_cone(const SemidefiniteProgram& p) {
  ConeProblem c;
  c.block_sizes = p.block_sizes;
  c.n_scalar = 0;
  const double sign = p.maximize ? -1.0 : 1.0;
  c.c_blocks.resize(p.block_sizes.size());
  for (std::size_t b = 0; b < p.block_sizes.size(); ++b) {
    c.c_blocks[b] = densify(p.objective[b], p.block_sizes[b]) * sign;
  }
  c.c_scalar.resize(0);
  c.b.resize(static_cast<int>(p.rhs.size()));
  for (std::size_t k = 0; k < p.rhs.size(); ++k) c.b[static_cast<int>(k)] = p.rhs[k];
  c.by_block.resize(p.block_sizes.size());
  for (std::size_t k = 0; k < p.constraints.size(); ++k)
    for (std::size_t b = 0; b < p.block_sizes.size(); ++b)
      if (!p.constraints[k][b].empty())
        c.by_block[b].push_back({static_cast<int>(k), p.constraints[k][b]});
  return c;
}

// Free LP variables are split as x = u - v with u, v >= 0.
struct LpVarMap {
  std::vector<int> pos, neg;  // neg[i] = -1 when x_i is sign-constrained
  int n_scalar = 0;
};

ConeProblem to_cone(const LinearProgram& p, LpVarMap* map) {
  map->pos.resize(p.n_vars);
  map->neg.assign(p.n_vars, -1);
  int n = 0;
  for (int i = 0; i < p.n_vars; ++i) {
    map->pos[i] = n++;
    if (!p.nonnegative[i]) map->neg[i] = n++;
  }
  map->n_scalar = n;

  ConeProblem c;
  c.n_scalar = n;
  const double sign = p.maximize ? -1.0 : 1.0;
  c.c_scalar = VectorXd::Zero(n);
  for (int i = 0; i < p.n_vars; ++i) {
    c.c_scalar[map->pos[i]] = sign * p.objective[i];
    if (map->neg[i] >= 0) c.c_scalar[map->neg[i]] = -sign * p.objective[i];
  }
  c.b.resize(static_cast<int>(p.rhs.size()));
  for (std::size_t k = 0; k < p.rhs.size(); ++k) c.b[static_cast<int>(k)] = p.rhs[k];
  c.scalar_cols.resize(n);
  for (std::size_t k = 0; k < p.rows.size(); ++k)
    for (const auto& [var, coeff] : p.rows[k]) {
      c.scalar_cols[map->pos[var]].push_back({static_cast<int>(k), coeff});
      if (map->neg[var] >= 0)
        c.scalar_cols[map->neg[var]].push_back({static_cast<int>(k), -coeff});
    }
  return c;
}

void flip_values(Solution* sol, bool maximize) {
  if (!maximize) return;
  sol->primal_value = -sol->primal_value;
  sol->dual_value = -sol->dual_value;
  // infeasibility certificates do not depend on the objective sense
  if (sol->status != SolveStatus::Infeasible)
    for (auto& v : sol->y) v = -v;
}

}  // namespace

void validate(const LinearProgram& p) {
  if (p.n_vars < 0 || static_cast<int>(p.objective.size()) != p.n_vars ||
      static_cast<int>(p.nonnegative.size()) != p.n_vars)
    throw std::invalid_argument("linear program dimensions inconsistent");
  if (p.rows.size() != p.rhs.size())
    throw std::invalid_argument("row/rhs count mismatch");
  for (double v : p.objective)
    if (!finite(v)) throw std::invalid_argument("nonfinite objective entry");
  for (double v : p.rhs)
    if (!finite(v)) throw std::invalid_argument("nonfinite right-hand side");
  for (const auto& row : p.rows)
    for (const auto& [var, coeff] : row) {
      if (var < 0 || var >= p.n_vars) throw std::invalid_argument("row entry out of range");
      if (!finite(coeff)) throw std::invalid_argument("nonfinite row entry");
    }
}

void validate(const SemidefiniteProgram& p) {
  const std::size_t nb = p.block_sizes.size();
  for (int s : p.block_sizes)
    if (s <= 0) throw std::invalid_argument("block sizes must be positive");
  if (p.objective.size() != nb)
    throw std::invalid_argument("objective block count mismatch");
  if (p.constraints.size() != p.rhs.size())
    throw std::invalid_argument("constraint/rhs count mismatch");
  auto check_entries = [&](const std::vector<SymEntry>& entries, int size) {
    for (const auto& e : entries) {
      if (e.row < 0 || e.col < 0 || e.row >= size || e.col >= size)
        throw std::invalid_argument("matrix entry out of block range");
      if (!finite(e.value)) throw std::invalid_argument("nonfinite matrix entry");
    }
  };
  for (std::size_t b = 0; b < nb; ++b) check_entries(p.objective[b], p.block_sizes[b]);
  for (const auto& ck : p.constraints) {
    if (ck.size() != nb) throw std::invalid_argument("constraint block count mismatch");
    for (std::size_t b = 0; b < nb; ++b) check_entries(ck[b], p.block_sizes[b]);
  }
  for (double v : p.rhs)
    if (!finite(v)) throw std::invalid_argument("nonfinite right-hand side");
}

Solution solve_lp(const LinearProgram& p, double tolerance) {
  validate(p);
  LpVarMap map;
  const ConeProblem cone = to_cone(p, &map);
  Solution sol = HsdSolver(cone, tolerance).run();
  // map split variables back to the caller's indexing
  if (!sol.x.empty()) {
    std::vector<double> x(p.n_vars);
    for (int i = 0; i < p.n_vars; ++i)
      x[i] = sol.x[map.pos[i]] - (map.neg[i] >= 0 ? sol.x[map.neg[i]] : 0.0);
    sol.x = std::move(x);
  }
  flip_values(&sol, p.maximize);
  return sol;
}

Solution solve_sdp(const SemidefiniteProgram& p, double tolerance) {
  validate(p);
  Solution sol = HsdSolver(to_cone(p), tolerance).run();
  flip_values(&sol, p.maximize);
  return sol;
}

// ---- JSON dump/load ----------------------------------------------------------

namespace {
using nlohmann::ordered_json;

ordered_json entry_json(const SymEntry& e) {
  return ordered_json{{"block", 0}, {"row", e.row}, {"col", e.col}, {"value", e.value}};
}
}  // namespace

std::string lp_to_json(const LinearProgram& p) {
  ordered_json j;
  j["type"] = "lp";
  j["maximize"] = p.maximize;
  j["objective"] = p.objective;
  j["nonnegative"] = std::vector<int>(p.nonnegative.begin(), p.nonnegative.end());
  ordered_json rows = ordered_json::array();
  for (std::size_t k = 0; k < p.rows.size(); ++k) {
    ordered_json row;
    row["rhs"] = p.rhs[k];
    ordered_json entries = ordered_json::array();
    for (const auto& [var, coeff] : p.rows[k])
      entries.push_back(ordered_json{{"var", var}, {"coeff", coeff}});
    row["entries"] = std::move(entries);
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j.dump(2);
}

LinearProgram lp_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("type").get<std::string>() != "lp")
      throw std::invalid_argument("not a linear program dump");
    LinearProgram p;
    p.objective = j.at("objective").get<std::vector<double>>();
    p.n_vars = static_cast<int>(p.objective.size());
    for (int v : j.at("nonnegative").get<std::vector<int>>())
      p.nonnegative.push_back(v != 0);
    p.maximize = j.at("maximize").get<bool>();
    for (const auto& row : j.at("rows")) {
      const int k = p.add_row(row.at("rhs").get<double>());
      for (const auto& e : row.at("entries"))
        p.add_row_entry(k, e.at("var").get<int>(), e.at("coeff").get<double>());
    }
    validate(p);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad linear program JSON: ") + e.what());
  }
}

std::string sdp_to_json(const SemidefiniteProgram& p) {
  ordered_json j;
  j["type"] = "sdp";
  j["maximize"] = p.maximize;
  j["block_sizes"] = p.block_sizes;
  ordered_json obj = ordered_json::array();
  for (std::size_t b = 0; b < p.objective.size(); ++b)
    for (const auto& e : p.objective[b]) {
      auto je = entry_json(e);
      je["block"] = static_cast<int>(b);
      obj.push_back(std::move(je));
    }
  j["objective"] = std::move(obj);
  ordered_json cons = ordered_json::array();
  for (std::size_t k = 0; k < p.constraints.size(); ++k) {
    ordered_json ck;
    ck["rhs"] = p.rhs[k];
    ordered_json entries = ordered_json::array();
    for (std::size_t b = 0; b < p.constraints[k].size(); ++b)
      for (const auto& e : p.constraints[k][b]) {
        auto je = entry_json(e);
        je["block"] = static_cast<int>(b);
        entries.push_back(std::move(je));
      }
    ck["entries"] = std::move(entries);
    cons.push_back(std::move(ck));
  }
  j["constraints"] = std::move(cons);
  return j.dump(2);
}

SemidefiniteProgram sdp_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("type").get<std::string>() != "sdp")
      throw std::invalid_argument("not a semidefinite program dump");
    SemidefiniteProgram p;
    p.set_blocks(j.at("block_sizes").get<std::vector<int>>());
    p.maximize = j.at("maximize").get<bool>();
    for (const auto& e : j.at("objective"))
      p.add_objective_entry(e.at("block").get<int>(), e.at("row").get<int>(),
                            e.at("col").get<int>(), e.at("value").get<double>());
    for (const auto& ck : j.at("constraints")) {
      const int k = p.add_constraint(ck.at("rhs").get<double>());
      for (const auto& e : ck.at("entries"))
        p.add_constraint_entry(k, e.at("block").get<int>(), e.at("row").get<int>(),
                               e.at("col").get<int>(), e.at("value").get<double>());
    }
    validate(p);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad semidefinite program JSON: ") + e.what());
  }
}

}  // namespace dirk
