#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "ridebot/autodiff.hpp"

namespace ridebot {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Smooth nonlinear program
///   min f(x)  s.t.  c(x) = 0,  g(x) <= 0,  lb <= x <= ub.
class NlpProblem {
 public:
  virtual ~NlpProblem() = default;

  [[nodiscard]] virtual int num_variables() const = 0;
  [[nodiscard]] virtual int num_equalities() const = 0;
  [[nodiscard]] virtual int num_inequalities() const = 0;
  [[nodiscard]] virtual const Eigen::VectorXd& lower_bounds() const = 0;
  [[nodiscard]] virtual const Eigen::VectorXd& upper_bounds() const = 0;

  [[nodiscard]] virtual double objective(const Eigen::VectorXd& x) const = 0;
  [[nodiscard]] virtual Eigen::VectorXd objective_gradient(const Eigen::VectorXd& x) const = 0;
  [[nodiscard]] virtual Eigen::VectorXd equalities(const Eigen::VectorXd& x) const = 0;
  [[nodiscard]] virtual Eigen::VectorXd inequalities(const Eigen::VectorXd& x) const = 0;
  [[nodiscard]] virtual SparseMatrix equality_jacobian(const Eigen::VectorXd& x) const = 0;
  [[nodiscard]] virtual SparseMatrix inequality_jacobian(const Eigen::VectorXd& x) const = 0;

  /// sigma * Hess f + sum_i y_eq[i] Hess c_i + sum_j y_in[j] Hess g_j,
  /// returned as a full symmetric matrix.
  [[nodiscard]] virtual SparseMatrix lagrangian_hessian(const Eigen::VectorXd& x,
                                                        double sigma,
                                                        const Eigen::VectorXd& y_eq,
                                                        const Eigen::VectorXd& y_in) const = 0;
};

enum class ElementKind { kObjective, kEquality, kInequality };

/// A small function of a few decision variables. Objective elements have a
/// single output that is summed into f; constraint elements fill `outputs`
/// consecutive rows starting at `row`.
struct Element {
  ElementKind kind = ElementKind::kObjective;
  std::vector<int> vars;
  int row = 0;
  int outputs = 1;
  std::function<void(std::span<const double>, std::span<double>)> eval;
  std::function<void(std::span<const AdScalar>, std::span<AdScalar>)> eval_ad;
};

/// Wraps a generic callable `f(in, out)` (taking spans of either scalar type)
/// into an Element.
template <typename F>
Element make_element(ElementKind kind, std::vector<int> vars, int row,
                     int outputs, F f) {
  Element e;
  e.kind = kind;
  e.vars = std::move(vars);
  e.row = row;
  e.outputs = outputs;
  e.eval = [f](std::span<const double> in, std::span<double> out) { f(in, out); };
  e.eval_ad = [f](std::span<const AdScalar> in, std::span<AdScalar> out) {
    f(in, out);
  };
  return e;
}

/// NlpProblem assembled from elements. First derivatives come from forward
/// autodiff over each element's local variables; element Hessians from
/// central differences of those exact gradients.
class ElementNlp : public NlpProblem {
 public:
  ElementNlp(int num_variables, int num_equalities, int num_inequalities);

  void add(Element e);
  void set_bounds(Eigen::VectorXd lb, Eigen::VectorXd ub);

  [[nodiscard]] int num_variables() const override { return n_; }
  [[nodiscard]] int num_equalities() const override { return m_eq_; }
  [[nodiscard]] int num_inequalities() const override { return m_in_; }
  [[nodiscard]] const Eigen::VectorXd& lower_bounds() const override { return lb_; }
  [[nodiscard]] const Eigen::VectorXd& upper_bounds() const override { return ub_; }

  [[nodiscard]] double objective(const Eigen::VectorXd& x) const override;
  [[nodiscard]] Eigen::VectorXd objective_gradient(const Eigen::VectorXd& x) const override;
  [[nodiscard]] Eigen::VectorXd equalities(const Eigen::VectorXd& x) const override;
  [[nodiscard]] Eigen::VectorXd inequalities(const Eigen::VectorXd& x) const override;
  [[nodiscard]] SparseMatrix equality_jacobian(const Eigen::VectorXd& x) const override;
  [[nodiscard]] SparseMatrix inequality_jacobian(const Eigen::VectorXd& x) const override;
  [[nodiscard]] SparseMatrix lagrangian_hessian(const Eigen::VectorXd& x, double sigma,
                                                const Eigen::VectorXd& y_eq,
                                                const Eigen::VectorXd& y_in) const override;

  [[nodiscard]] const std::vector<Element>& elements() const { return elements_; }

 private:
  Eigen::VectorXd constraint_values(const Eigen::VectorXd& x, ElementKind kind,
                                    int rows) const;
  SparseMatrix constraint_jacobian(const Eigen::VectorXd& x, ElementKind kind,
                                   int rows) const;

  int n_;
  int m_eq_;
  int m_in_;
  Eigen::VectorXd lb_;
  Eigen::VectorXd ub_;
  std::vector<Element> elements_;
};

/// Central-difference gradient / Jacobian, used by tests and diagnostics.
Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double step);
Eigen::MatrixXd finite_difference_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double step);

}  // namespace ridebot
