#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>

#include "ridebot/nlp.hpp"

namespace ridebot {

struct SolverOptions {
  // projected Lagrangian gradient, inf-norm, divided by
  // max(1, mean|y| / 100)
  double kkt_tolerance = 1e-6;
  // accepted instead when the subproblem can make no further progress
  double floor_kkt_tolerance = 1e-4;
  double feasibility_tolerance = 1e-6;  // max |c_i| and max(g_j, 0)
  int max_outer_iterations = 40;
  int max_inner_iterations = 200;
  int max_total_inner_iterations = 3000;
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  double max_penalty = 1e12;
  bool verbose = false;
};

/// Multipliers and penalty carried between related solves.
struct DualWarmStart {
  Eigen::VectorXd y_eq;
  Eigen::VectorXd y_in;
  double penalty = 10.0;
};

struct SolverResult {
  Eigen::VectorXd x;
  Eigen::VectorXd y_eq;
  Eigen::VectorXd y_in;
  double penalty = 0.0;
  double objective = 0.0;
  double max_violation = 0.0;  // equality and inequality infeasibility
  double kkt_residual = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  bool converged = false;
  std::string message;
};

/// Augmented Lagrangian method. Inequalities g <= 0 become g + s = 0 with
/// bounded slacks s >= 0, and each subproblem minimises
///   f + y'c + mu/2 |c|^2
/// over the bound box by a projected Newton iteration on the exact
/// Lagrangian Hessian (inertia-corrected), then updates multipliers or
/// grows the penalty. Never throws on non-convergence: the best iterate is
/// returned with `converged == false`.
SolverResult solve_augmented_lagrangian(const NlpProblem& nlp, const Eigen::VectorXd& x0,
                                        const SolverOptions& opt = {},
                                        const std::optional<DualWarmStart>& warm = std::nullopt);

/// Inf-norm of P(x - grad L) - x, with P the projection onto the bounds.
double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                               const Eigen::VectorXd& lb, const Eigen::VectorXd& ub);

}  // namespace ridebot
