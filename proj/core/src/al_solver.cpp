#include "ridebot/al_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/SparseCholesky>

namespace ridebot {

namespace {

using Eigen::VectorXd;

struct Merit {
  double value = 0.0;
  double f = 0.0;
  VectorXd c;
  VectorXd g;
};

class AugmentedLagrangian {
 public:
  AugmentedLagrangian(const NlpProblem& nlp, VectorXd y_eq, VectorXd y_in, double mu)
      : nlp_(nlp), y_eq_(std::move(y_eq)), y_in_(std::move(y_in)), mu_(mu) {}

  [[nodiscard]] Merit evaluate(const VectorXd& x) const {
    Merit m;
    m.f = nlp_.objective(x);
    m.c = nlp_.equalities(x);
    m.g = nlp_.inequalities(x);
    m.value = m.f + y_eq_.dot(m.c) + 0.5 * mu_ * m.c.squaredNorm();
    for (Eigen::Index j = 0; j < m.g.size(); ++j) {
      const double z = std::max(0.0, y_in_[j] + mu_ * m.g[j]);
      m.value += (z * z - y_in_[j] * y_in_[j]) / (2.0 * mu_);
    }
    return m;
  }

  // Multipliers implied by the current point: y + mu c, max(0, z + mu g).
  [[nodiscard]] VectorXd shifted_eq(const Merit& m) const { return y_eq_ + mu_ * m.c; }
  [[nodiscard]] VectorXd shifted_in(const Merit& m) const {
    return (y_in_ + mu_ * m.g).cwiseMax(0.0);
  }

  [[nodiscard]] VectorXd gradient(const VectorXd& x, const Merit& m) const {
    VectorXd grad = nlp_.objective_gradient(x);
    if (m.c.size() > 0) grad += nlp_.equality_jacobian(x).transpose() * shifted_eq(m);
    if (m.g.size() > 0) grad += nlp_.inequality_jacobian(x).transpose() * shifted_in(m);
    return grad;
  }

  [[nodiscard]] SparseMatrix hessian(const VectorXd& x, const Merit& m) const {
    const VectorXd yin = shifted_in(m);
    SparseMatrix H = nlp_.lagrangian_hessian(x, 1.0, shifted_eq(m), yin);
    if (m.c.size() > 0) {
      const SparseMatrix Jc = nlp_.equality_jacobian(x);
      H += mu_ * SparseMatrix(Jc.transpose() * Jc);
    }
    if (m.g.size() > 0) {
      SparseMatrix Jg = nlp_.inequality_jacobian(x);
      // keep only rows whose shifted multiplier is active
      VectorXd mask = (yin.array() > 0.0).cast<double>();
      const SparseMatrix Ja = mask.asDiagonal() * Jg;
      H += mu_ * SparseMatrix(Ja.transpose() * Ja);
    }
    return H;
  }

  [[nodiscard]] double mu() const { return mu_; }
  [[nodiscard]] const VectorXd& y_eq() const { return y_eq_; }
  [[nodiscard]] const VectorXd& y_in() const { return y_in_; }

  void update_multipliers(const Merit& m) {
    y_eq_ = shifted_eq(m);
    y_in_ = shifted_in(m);
  }
  void set_penalty(double mu) { mu_ = mu; }

 private:
  const NlpProblem& nlp_;
  VectorXd y_eq_;
  VectorXd y_in_;
  double mu_;
};


// Rewrites g(x) <= 0 as g(x) + s = 0 with s >= 0, so the augmented
// Lagrangian stays twice differentiable and only bounds remain as
// inequalities.
class SlackedProblem : public NlpProblem {
 public:
  explicit SlackedProblem(const NlpProblem& base)
      : base_(base),
        n_(base.num_variables()),
        m_eq_(base.num_equalities()),
        m_in_(base.num_inequalities()),
        lb_(n_ + m_in_),
        ub_(n_ + m_in_) {
    lb_ << base.lower_bounds(), VectorXd::Zero(m_in_);
    ub_ << base.upper_bounds(), VectorXd::Constant(m_in_, std::numeric_limits<double>::infinity());
  }

  [[nodiscard]] int num_variables() const override { return n_ + m_in_; }
  [[nodiscard]] int num_equalities() const override { return m_eq_ + m_in_; }
  [[nodiscard]] int num_inequalities() const override { return 0; }
  [[nodiscard]] const VectorXd& lower_bounds() const override { return lb_; }
  [[nodiscard]] const VectorXd& upper_bounds() const override { return ub_; }

  [[nodiscard]] double objective(const VectorXd& x) const override {
    return base_.objective(x.head(n_));
  }
  [[nodiscard]] VectorXd objective_gradient(const VectorXd& x) const override {
    VectorXd g = VectorXd::Zero(n_ + m_in_);
    g.head(n_) = base_.objective_gradient(x.head(n_));
    return g;
  }
  [[nodiscard]] VectorXd equalities(const VectorXd& x) const override {
    VectorXd c(m_eq_ + m_in_);
    c << base_.equalities(x.head(n_)), base_.inequalities(x.head(n_)) + x.tail(m_in_);
    return c;
  }
  [[nodiscard]] VectorXd inequalities(const VectorXd& /*x*/) const override {
    return VectorXd(0);
  }
  [[nodiscard]] SparseMatrix equality_jacobian(const VectorXd& x) const override {
    const SparseMatrix Jc = base_.equality_jacobian(x.head(n_));
    const SparseMatrix Jg = base_.inequality_jacobian(x.head(n_));
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(Jc.nonZeros() + Jg.nonZeros() + m_in_));
    for (int k = 0; k < Jc.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(Jc, k); it; ++it) {
        trips.emplace_back(it.row(), it.col(), it.value());
      }
    }
    for (int k = 0; k < Jg.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(Jg, k); it; ++it) {
        trips.emplace_back(m_eq_ + it.row(), it.col(), it.value());
      }
    }
    for (int j = 0; j < m_in_; ++j) trips.emplace_back(m_eq_ + j, n_ + j, 1.0);
    SparseMatrix J(m_eq_ + m_in_, n_ + m_in_);
    J.setFromTriplets(trips.begin(), trips.end());
    return J;
  }
  [[nodiscard]] SparseMatrix inequality_jacobian(const VectorXd& /*x*/) const override {
    return SparseMatrix(0, n_ + m_in_);
  }
  [[nodiscard]] SparseMatrix lagrangian_hessian(const VectorXd& x, double sigma,
                                                const VectorXd& y_eq,
                                                const VectorXd& /*y_in*/) const override {
    SparseMatrix H =
        base_.lagrangian_hessian(x.head(n_), sigma, y_eq.head(m_eq_), y_eq.tail(m_in_));
    H.conservativeResize(n_ + m_in_, n_ + m_in_);
    return H;
  }

 private:
  const NlpProblem& base_;
  int n_;
  int m_eq_;
  int m_in_;
  VectorXd lb_;
  VectorXd ub_;
};

VectorXd project(const VectorXd& x, const VectorXd& lb, const VectorXd& ub) {
  return x.cwiseMax(lb).cwiseMin(ub);
}

double violation(const AugmentedLagrangian& al, const Merit& m) {
  double v = m.c.size() > 0 ? m.c.cwiseAbs().maxCoeff() : 0.0;
  for (Eigen::Index j = 0; j < m.g.size(); ++j) {
    // complementarity-aware measure: max(g, -z/mu)
    v = std::max(v, std::abs(std::max(m.g[j], -al.y_in()[j] / al.mu())));
  }
  return v;
}

// Stationarity is measured relative to the multiplier size, as in IPOPT's
// scaled dual infeasibility: large multipliers put an absolute floor on how
// small the Lagrangian gradient can be made in double precision.
double dual_scale(const VectorXd& y) {
  constexpr double kMaxScale = 100.0;
  if (y.size() == 0) return 1.0;
  return std::max(kMaxScale, y.lpNorm<1>() / static_cast<double>(y.size())) / kMaxScale;
}

double primal_violation(const Merit& m) {
  double v = m.c.size() > 0 ? m.c.cwiseAbs().maxCoeff() : 0.0;
  if (m.g.size() > 0) v = std::max(v, m.g.maxCoeff());
  return std::max(v, 0.0);
}

struct InnerResult {
  VectorXd x;
  Merit merit;
  double pg = 0.0;
  int iterations = 0;
  bool stalled = false;
};

// Newton step on the free variables with the fixed ones moved by
// `fixed_move`. With `coupled` the free step accounts for the Hessian
// coupling to those moves. Adds delta I to the free block until it factors
// as positive definite.
class ReducedNewton {
 public:
  ReducedNewton(const SparseMatrix& H, double diag_scale) : H_(H), diag_scale_(diag_scale) {}

  bool solve(const VectorXd& grad, const std::vector<bool>& fixed, const VectorXd& fixed_move,
             bool coupled, double* delta, VectorXd* d) {
    const Eigen::Index n = grad.size();
    VectorXd rhs = coupled ? VectorXd(-grad - H_ * fixed_move) : VectorXd(-grad);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(H_.nonZeros() + n));
    for (int k = 0; k < H_.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(H_, k); it; ++it) {
        if (fixed[it.row()] || fixed[it.col()]) continue;
        trips.emplace_back(it.row(), it.col(), it.value());
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (fixed[i]) rhs[i] = fixed_move[i];
    }
    for (int attempt = 0; attempt < 60; ++attempt) {
      std::vector<Eigen::Triplet<double>> all = trips;
      for (Eigen::Index i = 0; i < n; ++i) all.emplace_back(i, i, fixed[i] ? 1.0 : *delta);
      SparseMatrix K(n, n);
      K.setFromTriplets(all.begin(), all.end());
      ldlt_.compute(K);
      if (ldlt_.info() == Eigen::Success && (ldlt_.vectorD().array() > 0.0).all()) {
        *d = ldlt_.solve(rhs);
        // large penalties make K ill-conditioned; refine, then insist on a
        // descent direction for the free block
        for (int refine = 0; refine < 2 && d->allFinite(); ++refine) {
          *d += ldlt_.solve(VectorXd(rhs - K * *d));
        }
        double free_slope = 0.0;
        double free_norm = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (fixed[i]) continue;
          free_slope += rhs[i] * (*d)[i];
          free_norm += rhs[i] * rhs[i];
        }
        if (d->allFinite() && (free_norm == 0.0 || free_slope > 0.0)) return true;
      }
      *delta = *delta == 0.0 ? 1e-8 * diag_scale_ : *delta * 8.0;
    }
    return false;
  }

 private:
  const SparseMatrix& H_;
  double diag_scale_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
};

// Projected Newton on the augmented Lagrangian over the bound box. Variables
// within eps of a bound with the gradient pushing outward are fixed on that
// bound; bounds that a full Newton step would cross are then added to the
// fixed set and the step is recomputed on the remaining subspace.
InnerResult minimize_subproblem(const AugmentedLagrangian& al, const NlpProblem& nlp,
                                VectorXd x, double tolerance, int max_iterations,
                                double* regularization) {
  const VectorXd& lb = nlp.lower_bounds();
  const VectorXd& ub = nlp.upper_bounds();
  const Eigen::Index n = x.size();

  InnerResult r;
  Merit m = al.evaluate(x);
  VectorXd grad = al.gradient(x, m);
  double pg = projected_gradient_norm(x, grad, lb, ub);

  auto line_search = [&](const VectorXd& dir, VectorXd& x_new, Merit& m_new) {
    double alpha = 1.0;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = project(x + alpha * dir, lb, ub);
      const double slope = grad.dot(x_new - x);
      if (slope < 0.0) {
        m_new = al.evaluate(x_new);
        if (std::isfinite(m_new.value) && m_new.value <= m.value + 1e-4 * slope) {
          return true;
        }
      }
      alpha *= 0.5;
    }
    return false;
  };

  for (int it = 0; it < max_iterations && pg > tolerance; ++it) {
    ++r.iterations;
    const double eps = std::min(1e-3, pg);
    std::vector<bool> fixed(static_cast<std::size_t>(n), false);
    VectorXd move = VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (lb[i] == ub[i]) {
        fixed[i] = true;
      } else if (x[i] - lb[i] <= eps && grad[i] > 0.0) {
        fixed[i] = true;
        move[i] = lb[i] - x[i];
      } else if (ub[i] - x[i] <= eps && grad[i] < 0.0) {
        fixed[i] = true;
        move[i] = ub[i] - x[i];
      }
    }

    const SparseMatrix H = al.hessian(x, m);
    double diag_scale = 1.0;
    for (int k = 0; k < H.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator itH(H, k); itH; ++itH) {
        if (itH.row() == itH.col()) diag_scale = std::max(diag_scale, std::abs(itH.value()));
      }
    }
    ReducedNewton newton(H, diag_scale);
    double delta = *regularization > 0.0 ? *regularization / 4.0 : 0.0;
    if (delta < 1e-14 * diag_scale) delta = 0.0;

    // the coupled step is more accurate, but near-singular free blocks can
    // turn it uphill; the uncoupled one is always a descent direction
    auto step = [&](VectorXd* out) {
      if (newton.solve(grad, fixed, move, true, &delta, out) && grad.dot(*out) < 0.0) return true;
      return newton.solve(grad, fixed, move, false, &delta, out);
    };
    VectorXd d;
    bool factored = step(&d);
    VectorXd d_plain = factored ? d : VectorXd(-grad);
    for (int round = 0; factored && round < 4; ++round) {
      bool grew = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (fixed[i]) continue;
        if (x[i] + d[i] < lb[i]) {
          fixed[i] = true;
          move[i] = lb[i] - x[i];
          grew = true;
        } else if (x[i] + d[i] > ub[i]) {
          fixed[i] = true;
          move[i] = ub[i] - x[i];
          grew = true;
        }
      }
      if (!grew) break;
      VectorXd d_sub;
      if (!step(&d_sub)) break;
      d = std::move(d_sub);
    }
    *regularization = delta;

    VectorXd x_new;
    Merit m_new;
    bool ok = factored && line_search(d, x_new, m_new);
    VectorXd grad_new;
    double pg_new = 0.0;
    bool have_grad = false;
    if (!ok && factored &&
        -grad.dot(d) <= 100.0 * std::numeric_limits<double>::epsilon() *
                            std::max(1.0, std::abs(m.value))) {
      // the merit cannot resolve the predicted decrease; judge the full
      // step by the projected gradient instead
      x_new = project(x + d, lb, ub);
      m_new = al.evaluate(x_new);
      grad_new = al.gradient(x_new, m_new);
      pg_new = projected_gradient_norm(x_new, grad_new, lb, ub);
      ok = have_grad = std::isfinite(m_new.value) && pg_new < pg;
    }
    if (!ok && factored) ok = line_search(d_plain, x_new, m_new);
    if (!ok) {
      VectorXd steepest = -grad / diag_scale;
      ok = line_search(steepest, x_new, m_new);
    }
    if (!ok) {
      r.stalled = true;
      break;
    }
    const double moved = (x_new - x).cwiseAbs().maxCoeff();
    x = std::move(x_new);
    m = std::move(m_new);
    if (have_grad) {
      grad = std::move(grad_new);
      pg = pg_new;
    } else {
      grad = al.gradient(x, m);
      pg = projected_gradient_norm(x, grad, lb, ub);
    }
    if (moved <= 1e-15 * (1.0 + x.cwiseAbs().maxCoeff())) {
      r.stalled = true;
      break;
    }
  }
  r.x = std::move(x);
  r.merit = std::move(m);
  r.pg = pg;
  return r;
}

}  // namespace

double projected_gradient_norm(const VectorXd& x, const VectorXd& grad, const VectorXd& lb,
                               const VectorXd& ub) {
  if (x.size() == 0) return 0.0;
  return (project(x - grad, lb, ub) - x).cwiseAbs().maxCoeff();
}

namespace {

SolverResult solve_equality_form(const NlpProblem& nlp, const VectorXd& x0,
                                 const SolverOptions& opt,
                                 const std::optional<DualWarmStart>& warm) {
  const int n = nlp.num_variables();
  const int m_eq = nlp.num_equalities();
  const int m_in = nlp.num_inequalities();
  if (x0.size() != n) throw std::invalid_argument("initial point has wrong dimension");

  VectorXd y_eq = VectorXd::Zero(m_eq);
  VectorXd y_in = VectorXd::Zero(m_in);
  double mu = opt.initial_penalty;
  if (warm && warm->y_eq.size() == m_eq && warm->y_in.size() == m_in) {
    y_eq = warm->y_eq;
    y_in = warm->y_in.cwiseMax(0.0);
    mu = std::max(warm->penalty, opt.initial_penalty);
  }
  AugmentedLagrangian al(nlp, y_eq, y_in, mu);

  VectorXd x = project(x0, nlp.lower_bounds(), nlp.upper_bounds());
  double omega = std::max(opt.kkt_tolerance, 1.0 / mu);
  double eta = std::max(opt.feasibility_tolerance, 1.0 / std::pow(mu, 0.1));
  double regularization = 0.0;

  SolverResult res;
  res.converged = false;
  VectorXd best_x = x;
  double best_violation = std::numeric_limits<double>::infinity();

  for (int outer = 0; outer < opt.max_outer_iterations; ++outer) {
    res.outer_iterations = outer + 1;
    const int budget =
        std::min(opt.max_inner_iterations, opt.max_total_inner_iterations - res.inner_iterations);
    if (budget <= 0) {
      res.message = "inner iteration budget exhausted";
      break;
    }
    const double scale_in = dual_scale(al.y_eq());
    InnerResult inner =
        minimize_subproblem(al, nlp, x, omega * scale_in, budget, &regularization);
    res.inner_iterations += inner.iterations;
    x = inner.x;

    const double viol = violation(al, inner.merit);
    const double primal = primal_violation(inner.merit);
    const double stationarity = inner.pg / dual_scale(al.shifted_eq(inner.merit));
    if (primal < best_violation) {
      best_violation = primal;
      best_x = x;
    }
    if (opt.verbose) {
      std::fprintf(stderr,
                   "  al outer %2d  mu %.1e  f %.8e  viol %.3e  pg %.3e  inner %d%s\n",
                   outer, al.mu(), inner.merit.f, viol, stationarity, inner.iterations,
                   inner.stalled ? " (stalled)" : "");
    }

    if (viol <= eta) {
      const bool feasible =
          viol <= opt.feasibility_tolerance && primal <= opt.feasibility_tolerance;
      // a stalled inner loop on a feasible point has hit the rounding floor
      // of the penalty term; accept a slightly looser stationarity there
      if (feasible && (stationarity <= opt.kkt_tolerance ||
                       (inner.stalled && stationarity <= opt.floor_kkt_tolerance))) {
        res.converged = true;
        res.kkt_residual = stationarity;
        res.message = stationarity <= opt.kkt_tolerance ? "converged"
                                                         : "converged at precision floor";
        break;
      }
      al.update_multipliers(inner.merit);
      eta = std::max(opt.feasibility_tolerance * 0.5, eta / std::pow(al.mu(), 0.9));
      omega = std::max(opt.kkt_tolerance * 0.5, omega / al.mu());
    } else {
      if (al.mu() >= opt.max_penalty) {
        res.message = "penalty limit reached while infeasible";
        break;
      }
      al.set_penalty(std::min(opt.max_penalty, al.mu() * opt.penalty_growth));
      eta = std::max(opt.feasibility_tolerance * 0.5, 1.0 / std::pow(al.mu(), 0.1));
      omega = std::max(opt.kkt_tolerance * 0.5, 1.0 / al.mu());
    }
    if (inner.stalled && viol > eta && al.mu() >= opt.max_penalty) {
      res.message = "subproblem stalled";
      break;
    }
  }
  if (!res.converged && res.message.empty()) res.message = "outer iteration limit reached";

  if (!res.converged && best_violation < primal_violation(al.evaluate(x))) x = best_x;
  res.x = x;
  const Merit final_merit = al.evaluate(x);
  res.objective = final_merit.f;
  res.max_violation = primal_violation(final_merit);
  res.y_eq = al.y_eq();
  res.y_in = al.y_in();
  res.penalty = al.mu();
  if (!res.converged) {
    // report stationarity of the plain Lagrangian at the returned multipliers
    VectorXd grad = nlp.objective_gradient(x);
    if (m_eq > 0) grad += nlp.equality_jacobian(x).transpose() * res.y_eq;
    if (m_in > 0) grad += nlp.inequality_jacobian(x).transpose() * res.y_in;
    res.kkt_residual = projected_gradient_norm(x, grad, nlp.lower_bounds(), nlp.upper_bounds()) /
                       dual_scale(res.y_eq);
  }
  return res;
}

}  // namespace

SolverResult solve_augmented_lagrangian(const NlpProblem& nlp, const VectorXd& x0,
                                        const SolverOptions& opt,
                                        const std::optional<DualWarmStart>& warm) {
  const int n = nlp.num_variables();
  const int m_eq = nlp.num_equalities();
  const int m_in = nlp.num_inequalities();
  if (x0.size() != n) throw std::invalid_argument("initial point has wrong dimension");
  if (m_in == 0) return solve_equality_form(nlp, x0, opt, warm);

  const SlackedProblem slacked(nlp);
  VectorXd z0(n + m_in);
  const VectorXd x_start = project(x0, nlp.lower_bounds(), nlp.upper_bounds());
  z0 << x_start, (-nlp.inequalities(x_start)).cwiseMax(0.0);
  std::optional<DualWarmStart> slack_warm;
  if (warm && warm->y_eq.size() == m_eq && warm->y_in.size() == m_in) {
    DualWarmStart w;
    w.y_eq.resize(m_eq + m_in);
    w.y_eq << warm->y_eq, warm->y_in;
    w.y_in = VectorXd(0);
    w.penalty = warm->penalty;
    slack_warm = std::move(w);
  }
  SolverResult r = solve_equality_form(slacked, z0, opt, slack_warm);
  const VectorXd y = r.y_eq;
  r.x = r.x.head(n).eval();
  r.y_eq = y.head(m_eq);
  r.y_in = y.tail(m_in);
  return r;
}

}  // namespace ridebot
