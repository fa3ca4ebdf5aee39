#include "ridebot/nlp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ridebot {

namespace {

using Triplet = Eigen::Triplet<double>;

std::vector<double> gather(const Eigen::VectorXd& x, const std::vector<int>& vars) {
  std::vector<double> local(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i) local[i] = x[vars[i]];
  return local;
}

// Evaluates an element with every local variable seeded.
std::vector<AdScalar> eval_seeded(const Element& e, std::span<const double> local) {
  const int k = static_cast<int>(local.size());
  std::vector<AdScalar> in(local.size());
  for (int i = 0; i < k; ++i) in[i] = ad_variable(local[i], k, i);
  std::vector<AdScalar> out(e.outputs, ad_constant(0.0, k));
  e.eval_ad(in, out);
  return out;
}

// Gradient of sum_o w_o out_o at a local point.
Eigen::VectorXd weighted_gradient(const Element& e, std::span<const double> local,
                                  std::span<const double> weights) {
  const auto out = eval_seeded(e, local);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(local.size()));
  for (int o = 0; o < e.outputs; ++o) {
    if (weights[o] == 0.0) continue;
    const auto& d = out[o].derivatives();
    if (d.size() == 0) continue;
    grad += weights[o] * d;
  }
  return grad;
}

}  // namespace

ElementNlp::ElementNlp(int num_variables, int num_equalities, int num_inequalities)
    : n_(num_variables),
      m_eq_(num_equalities),
      m_in_(num_inequalities),
      lb_(Eigen::VectorXd::Constant(num_variables, -std::numeric_limits<double>::infinity())),
      ub_(Eigen::VectorXd::Constant(num_variables, std::numeric_limits<double>::infinity())) {}

void ElementNlp::add(Element e) {
  for (int v : e.vars) {
    if (v < 0 || v >= n_) throw std::out_of_range("element variable index out of range");
  }
  if (e.vars.size() > 32) throw std::invalid_argument("element has more than 32 variables");
  const int rows = e.kind == ElementKind::kEquality     ? m_eq_
                   : e.kind == ElementKind::kInequality ? m_in_
                                                        : 1;
  if (e.kind != ElementKind::kObjective && (e.row < 0 || e.row + e.outputs > rows)) {
    throw std::out_of_range("element rows out of range");
  }
  if (e.kind == ElementKind::kObjective && e.outputs != 1) {
    throw std::invalid_argument("objective elements have exactly one output");
  }
  elements_.push_back(std::move(e));
}

void ElementNlp::set_bounds(Eigen::VectorXd lb, Eigen::VectorXd ub) {
  if (lb.size() != n_ || ub.size() != n_) throw std::invalid_argument("bound size mismatch");
  if ((lb.array() > ub.array()).any()) throw std::invalid_argument("lower bound above upper bound");
  lb_ = std::move(lb);
  ub_ = std::move(ub);
}

double ElementNlp::objective(const Eigen::VectorXd& x) const {
  double f = 0.0;
  double out = 0.0;
  for (const Element& e : elements_) {
    if (e.kind != ElementKind::kObjective) continue;
    const auto local = gather(x, e.vars);
    e.eval(local, std::span<double>(&out, 1));
    f += out;
  }
  return f;
}

Eigen::VectorXd ElementNlp::objective_gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n_);
  const double one = 1.0;
  for (const Element& e : elements_) {
    if (e.kind != ElementKind::kObjective) continue;
    const auto local = gather(x, e.vars);
    const Eigen::VectorXd g = weighted_gradient(e, local, std::span<const double>(&one, 1));
    for (std::size_t i = 0; i < e.vars.size(); ++i) grad[e.vars[i]] += g[static_cast<Eigen::Index>(i)];
  }
  return grad;
}

Eigen::VectorXd ElementNlp::constraint_values(const Eigen::VectorXd& x, ElementKind kind,
                                              int rows) const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(rows);
  for (const Element& e : elements_) {
    if (e.kind != kind) continue;
    const auto local = gather(x, e.vars);
    e.eval(local, std::span<double>(c.data() + e.row, e.outputs));
  }
  return c;
}

SparseMatrix ElementNlp::constraint_jacobian(const Eigen::VectorXd& x, ElementKind kind,
                                             int rows) const {
  std::vector<Triplet> trips;
  for (const Element& e : elements_) {
    if (e.kind != kind) continue;
    const auto local = gather(x, e.vars);
    const auto out = eval_seeded(e, local);
    for (int o = 0; o < e.outputs; ++o) {
      const auto& d = out[o].derivatives();
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (d[i] != 0.0) trips.emplace_back(e.row + o, e.vars[i], d[i]);
      }
    }
  }
  SparseMatrix J(rows, n_);
  J.setFromTriplets(trips.begin(), trips.end());
  return J;
}

Eigen::VectorXd ElementNlp::equalities(const Eigen::VectorXd& x) const {
  return constraint_values(x, ElementKind::kEquality, m_eq_);
}

Eigen::VectorXd ElementNlp::inequalities(const Eigen::VectorXd& x) const {
  return constraint_values(x, ElementKind::kInequality, m_in_);
}

SparseMatrix ElementNlp::equality_jacobian(const Eigen::VectorXd& x) const {
  return constraint_jacobian(x, ElementKind::kEquality, m_eq_);
}

SparseMatrix ElementNlp::inequality_jacobian(const Eigen::VectorXd& x) const {
  return constraint_jacobian(x, ElementKind::kInequality, m_in_);
}

SparseMatrix ElementNlp::lagrangian_hessian(const Eigen::VectorXd& x, double sigma,
                                            const Eigen::VectorXd& y_eq,
                                            const Eigen::VectorXd& y_in) const {
  std::vector<Triplet> trips;
  std::vector<double> weights;
  for (const Element& e : elements_) {
    weights.assign(static_cast<std::size_t>(e.outputs), 0.0);
    bool any = false;
    for (int o = 0; o < e.outputs; ++o) {
      double w = sigma;
      if (e.kind == ElementKind::kEquality) w = y_eq[e.row + o];
      if (e.kind == ElementKind::kInequality) w = y_in[e.row + o];
      weights[o] = w;
      any = any || w != 0.0;
    }
    if (!any) continue;

    auto local = gather(x, e.vars);
    const int k = static_cast<int>(local.size());
    Eigen::MatrixXd H(k, k);
    for (int j = 0; j < k; ++j) {
      const double xj = local[j];
      const double h = 1e-6 * std::max(1.0, std::abs(xj));
      local[j] = xj + h;
      const Eigen::VectorXd gp = weighted_gradient(e, local, weights);
      local[j] = xj - h;
      const Eigen::VectorXd gm = weighted_gradient(e, local, weights);
      local[j] = xj;
      H.col(j) = (gp - gm) / (2.0 * h);
    }
    H = 0.5 * (H + H.transpose()).eval();
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        if (H(i, j) != 0.0) trips.emplace_back(e.vars[i], e.vars[j], H(i, j));
      }
    }
  }
  SparseMatrix Hs(n_, n_);
  Hs.setFromTriplets(trips.begin(), trips.end());
  return Hs;
}

Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + step;
    const double fp = f(xp);
    xp[i] = xi - step;
    const double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

Eigen::MatrixXd finite_difference_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double step) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd J(f0.size(), x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + step;
    const Eigen::VectorXd fp = f(xp);
    xp[i] = xi - step;
    const Eigen::VectorXd fm = f(xp);
    xp[i] = xi;
    J.col(i) = (fp - fm) / (2.0 * step);
  }
  return J;
}

}  // namespace ridebot
