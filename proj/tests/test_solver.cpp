#include <cmath>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include <ridebot/al_solver.hpp>
#include <ridebot/nlp.hpp>

#include "double_integrator.hpp"
#include "generators.hpp"

namespace ridebot {
namespace {

using testing::Gen;

Eigen::VectorXd box(int n, double v) { return Eigen::VectorXd::Constant(n, v); }

TEST(ElementNlp, DerivativesMatchFiniteDifferences) {
  ElementNlp nlp(4, 2, 1);
  nlp.add(make_element(ElementKind::kObjective, {0, 1, 2}, 0, 1, [](auto in, auto out) {
    using std::exp;
    using std::sin;
    out[0] = sin(in[0]) * in[1] * in[1] + exp(0.3 * in[2]) * in[0];
  }));
  nlp.add(make_element(ElementKind::kObjective, {3}, 0, 1,
                       [](auto in, auto out) { out[0] = in[0] * in[0] * in[0]; }));
  nlp.add(make_element(ElementKind::kEquality, {0, 3}, 0, 2, [](auto in, auto out) {
    using std::cos;
    out[0] = cos(in[0]) * in[1];
    out[1] = in[0] * in[1] - 2.0;
  }));
  nlp.add(make_element(ElementKind::kInequality, {1, 2}, 0, 1,
                       [](auto in, auto out) { out[0] = in[0] * in[0] + in[1] * in[1] - 4.0; }));
  nlp.set_bounds(box(4, -10.0), box(4, 10.0));

  Gen gen(51);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x(4);
    for (int i = 0; i < 4; ++i) x[i] = gen.uniform(-2.0, 2.0);
    const Eigen::VectorXd g_fd = finite_difference_gradient(
        [&](const Eigen::VectorXd& v) { return nlp.objective(v); }, x, 1e-6);
    EXPECT_LT((nlp.objective_gradient(x) - g_fd).cwiseAbs().maxCoeff(), 1e-7);
    const Eigen::MatrixXd J_fd = finite_difference_jacobian(
        [&](const Eigen::VectorXd& v) { return nlp.equalities(v); }, x, 1e-6);
    EXPECT_LT((Eigen::MatrixXd(nlp.equality_jacobian(x)) - J_fd).cwiseAbs().maxCoeff(), 1e-7);
    const Eigen::MatrixXd G_fd = finite_difference_jacobian(
        [&](const Eigen::VectorXd& v) { return nlp.inequalities(v); }, x, 1e-6);
    EXPECT_LT((Eigen::MatrixXd(nlp.inequality_jacobian(x)) - G_fd).cwiseAbs().maxCoeff(), 1e-7);

    // Hessian of the Lagrangian against differences of its gradient.
    const Eigen::VectorXd y_eq = Eigen::Vector2d(gen.uniform(-1, 1), gen.uniform(-1, 1));
    const Eigen::VectorXd y_in = Eigen::VectorXd::Constant(1, gen.uniform(0, 1));
    auto lagrangian_gradient = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
      return 0.7 * nlp.objective_gradient(v) + nlp.equality_jacobian(v).transpose() * y_eq +
             nlp.inequality_jacobian(v).transpose() * y_in;
    };
    const Eigen::MatrixXd H_fd = finite_difference_jacobian(lagrangian_gradient, x, 1e-6);
    const Eigen::MatrixXd H = nlp.lagrangian_hessian(x, 0.7, y_eq, y_in);
    EXPECT_LT((H - H.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((H - H_fd).cwiseAbs().maxCoeff(), 1e-5 * std::max(1.0, H.cwiseAbs().maxCoeff()));
  }
}

TEST(AugmentedLagrangian, EqualityConstrainedQuadratic) {
  // min (x-1)^2 + (y-2)^2 s.t. x + y = 1  ->  (0, 1)
  ElementNlp nlp(2, 1, 0);
  nlp.add(make_element(ElementKind::kObjective, {0, 1}, 0, 1, [](auto in, auto out) {
    out[0] = (in[0] - 1.0) * (in[0] - 1.0) + (in[1] - 2.0) * (in[1] - 2.0);
  }));
  nlp.add(make_element(ElementKind::kEquality, {0, 1}, 0, 1,
                       [](auto in, auto out) { out[0] = in[0] + in[1] - 1.0; }));
  nlp.set_bounds(box(2, -10), box(2, 10));
  const SolverResult r = solve_augmented_lagrangian(nlp, Eigen::Vector2d(5.0, -3.0));
  ASSERT_TRUE(r.converged) << r.message;
  EXPECT_NEAR(r.x[0], 0.0, 1e-6);
  EXPECT_NEAR(r.x[1], 1.0, 1e-6);
  EXPECT_NEAR(r.objective, 2.0, 1e-6);
  EXPECT_NEAR(r.y_eq[0], 2.0, 1e-4);
}

TEST(AugmentedLagrangian, ActiveInequality) {
  // min x^2 + y^2 s.t. 1 - x - y <= 0  ->  (0.5, 0.5)
  ElementNlp nlp(2, 0, 1);
  nlp.add(make_element(ElementKind::kObjective, {0, 1}, 0, 1,
                       [](auto in, auto out) { out[0] = in[0] * in[0] + in[1] * in[1]; }));
  nlp.add(make_element(ElementKind::kInequality, {0, 1}, 0, 1,
                       [](auto in, auto out) { out[0] = 1.0 - in[0] - in[1]; }));
  nlp.set_bounds(box(2, -10), box(2, 10));
  const SolverResult r = solve_augmented_lagrangian(nlp, Eigen::Vector2d(-2.0, 3.0));
  ASSERT_TRUE(r.converged) << r.message;
  EXPECT_NEAR(r.x[0], 0.5, 1e-6);
  EXPECT_NEAR(r.x[1], 0.5, 1e-6);
  EXPECT_NEAR(r.y_in[0], 1.0, 1e-4);
}

TEST(AugmentedLagrangian, ActiveBound) {
  ElementNlp nlp(1, 0, 0);
  nlp.add(make_element(ElementKind::kObjective, {0}, 0, 1,
                       [](auto in, auto out) { out[0] = (in[0] - 3.0) * (in[0] - 3.0); }));
  nlp.set_bounds(box(1, -1), box(1, 2));
  const SolverResult r = solve_augmented_lagrangian(nlp, Eigen::VectorXd::Zero(1));
  ASSERT_TRUE(r.converged) << r.message;
  EXPECT_EQ(r.x[0], 2.0);
  EXPECT_EQ(projected_gradient_norm(r.x, Eigen::VectorXd::Constant(1, -2.0), box(1, -1), box(1, 2)),
            0.0);
}

TEST(AugmentedLagrangian, Rosenbrock) {
  ElementNlp nlp(2, 0, 0);
  nlp.add(make_element(ElementKind::kObjective, {0, 1}, 0, 1, [](auto in, auto out) {
    out[0] = 100.0 * (in[1] - in[0] * in[0]) * (in[1] - in[0] * in[0]) +
             (1.0 - in[0]) * (1.0 - in[0]);
  }));
  nlp.set_bounds(box(2, -5), box(2, 5));
  const SolverResult r = solve_augmented_lagrangian(nlp, Eigen::Vector2d(-1.2, 1.0));
  ASSERT_TRUE(r.converged) << r.message;
  EXPECT_NEAR(r.x[0], 1.0, 1e-5);
  EXPECT_NEAR(r.x[1], 1.0, 1e-5);
}

TEST(AugmentedLagrangian, InfeasibleProblemIsFlaggedNotThrown) {
  ElementNlp nlp(1, 2, 0);
  nlp.add(make_element(ElementKind::kObjective, {0}, 0, 1,
                       [](auto in, auto out) { out[0] = in[0] * in[0]; }));
  nlp.add(make_element(ElementKind::kEquality, {0}, 0, 2, [](auto in, auto out) {
    out[0] = in[0] - 1.0;
    out[1] = in[0] - 2.0;
  }));
  nlp.set_bounds(box(1, -10), box(1, 10));
  SolverResult r;
  ASSERT_NO_THROW(r = solve_augmented_lagrangian(nlp, Eigen::VectorXd::Zero(1)));
  EXPECT_FALSE(r.converged);
  EXPECT_GT(r.max_violation, 0.1);
  EXPECT_FALSE(r.message.empty());
}

// Exact optimum of the trapezoidal transcription: one linear KKT solve.
Eigen::VectorXd discrete_double_integrator_optimum(int N) {
  const int n = 3 * (N + 1);
  const int m = 2 * N + 4;
  const double h = 1.0 / N;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + m, n + m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
  for (int k = 0; k < N; ++k) {
    K(3 * k + 2, 3 * k + 2) += h;
    K(3 * k + 5, 3 * k + 5) += h;
  }
  auto row = [&](int r, int col, double v) {
    K(n + r, col) += v;
    K(col, n + r) += v;
  };
  for (int k = 0; k < N; ++k) {
    row(2 * k, 3 * k + 3, 1.0);
    row(2 * k, 3 * k, -1.0);
    row(2 * k, 3 * k + 1, -0.5 * h);
    row(2 * k, 3 * k + 4, -0.5 * h);
    row(2 * k + 1, 3 * k + 4, 1.0);
    row(2 * k + 1, 3 * k + 1, -1.0);
    row(2 * k + 1, 3 * k + 2, -0.5 * h);
    row(2 * k + 1, 3 * k + 5, -0.5 * h);
  }
  row(2 * N, 0, 1.0);
  row(2 * N + 1, 1, 1.0);
  row(2 * N + 2, 3 * N, 1.0);
  row(2 * N + 3, 3 * N + 1, 1.0);
  rhs[n + 2 * N + 2] = 1.0;
  return K.fullPivLu().solve(rhs).head(n);
}

TEST(AugmentedLagrangian, DoubleIntegratorMatchesTheDiscreteOptimum) {
  for (int segments : {20, 50}) {
    testing::DoubleIntegratorProblem prob;
    prob.segments = segments;
    const auto nlp = prob.build();
    const SolverResult r = solve_augmented_lagrangian(*nlp, Eigen::VectorXd::Zero(prob.size()));
    ASSERT_TRUE(r.converged) << r.message;
    const Eigen::VectorXd exact = discrete_double_integrator_optimum(segments);
    EXPECT_LT((r.x - exact).cwiseAbs().maxCoeff(), 1e-3) << "N = " << segments;
    const double exact_objective = prob.objective_of(exact);
    EXPECT_LT(std::abs(r.objective - exact_objective) / exact_objective, 1e-4);
    // Trapezoidal error shrinks with the square of the step.
    const double rel = (r.objective - prob.analytic_objective()) / prob.analytic_objective();
    EXPECT_GT(rel, 0.0);
    EXPECT_LT(rel, 5.0 / (segments * segments)) << "J = " << r.objective;
  }
}

TEST(AugmentedLagrangian, DoubleIntegratorDefaultGridIsWithinHalfAPercent) {
  testing::DoubleIntegratorProblem prob;
  const auto nlp = prob.build();
  const SolverResult r = solve_augmented_lagrangian(*nlp, Eigen::VectorXd::Zero(prob.size()));
  ASSERT_TRUE(r.converged) << r.message;
  EXPECT_LT(std::abs(r.objective - prob.analytic_objective()) / prob.analytic_objective(), 0.005);
}

}  // namespace
}  // namespace ridebot
