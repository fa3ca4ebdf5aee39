#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>

#include "ridebot/al_solver.hpp"
#include "ridebot/control.hpp"
#include "ridebot/equilibrium.hpp"
#include "ridebot/metrics.hpp"
#include "ridebot/model.hpp"
#include "ridebot/nlp.hpp"
#include "ridebot/simulate.hpp"
#include "ridebot/trajectory.hpp"

namespace ridebot {

/// State and input boxes for the braking problem.
struct BrakingBounds {
  double zeta_max = 0.52;   // |zeta| [rad]
  double theta_max = 0.35;  // |theta| [rad], the fall-over threshold
  double tau_R_max = 60.0;  // |tau_R| [N m]
  double tau_max = 40.0;    // |tau| [N m]
  double t_F_min = 0.2;
  double t_F_max = 10.0;
};

/// Rider-side minimum-effort braking from a steady cruise to a full stop.
struct BrakingProblem {
  ControlScheme scheme = ControlScheme::hacs1(0.5);
  double v0 = 1.4;  // [m/s]
  BrakingWeights weights;
  BrakingBounds bounds;
  int segments = 50;

  /// Throws std::invalid_argument: N < 10, non-positive bounds, or a scheme
  /// with integral state (HACS-2/3 cannot be transcribed without state
  /// augmentation).
  void validate() const;
};

/// Position of each decision variable. Knot k holds
/// (zeta, theta, phi, zeta_dot, theta_dot, phi_dot, tau_R); the free final
/// time is last.
struct DecisionLayout {
  int segments = 0;
  static constexpr int kStride = 7;
  static constexpr int kTauR = 6;

  [[nodiscard]] int knots() const { return segments + 1; }
  [[nodiscard]] int index(int knot, int field) const { return knot * kStride + field; }
  [[nodiscard]] int final_time() const { return knots() * kStride; }
  [[nodiscard]] int size() const { return final_time() + 1; }
};

/// Trapezoidal direct-collocation transcription. The drivetrain torque is
/// substituted by the scheme's control law, so only the rider torque is a
/// free input.
struct NLPInstance {
  ElementNlp nlp{0, 0, 0};
  DecisionLayout layout;
  BrakingProblem problem;
  RiderBallbotParams params;
  Gains gains;
  Equilibrium initial;  // pinned first knot
  int defect_constraints = 0;
  int boundary_constraints = 0;
  int control_tie_constraints = 0;  // zero: the tie is enforced by substitution

  /// Linear interpolation from the cruise equilibrium to rest over a
  /// guessed braking time.
  [[nodiscard]] Eigen::VectorXd initial_guess(double t_F_guess = 2.0) const;

  /// Drivetrain torque, interaction moment and command speed at a knot.
  [[nodiscard]] double knot_drive_torque(const Eigen::VectorXd& x, int knot,
                                         double* phi_dot_c = nullptr) const;
  /// One knot per collocation point.
  [[nodiscard]] Trajectory knot_trajectory(const Eigen::VectorXd& x) const;
  /// States on a uniform grid via the quadratic interpolant that trapezoidal
  /// collocation implies; rider torque linear between knots.
  [[nodiscard]] Trajectory resample(const Eigen::VectorXd& x, double max_dt = 0.005) const;
  /// Largest collocation defect, recomputed from eom_forward in double
  /// precision (independent of the autodiff elements).
  [[nodiscard]] double max_defect(const Eigen::VectorXd& x) const;
  /// Largest violation of the variable boxes and the drivetrain limit.
  [[nodiscard]] double max_box_violation(const Eigen::VectorXd& x) const;
};

/// Carries a decision vector of `from` onto the grid of `to` by linear
/// interpolation in normalised time; the final time is copied.
Eigen::VectorXd transfer_solution(const NLPInstance& from, const Eigen::VectorXd& x,
                                  const NLPInstance& to);

/// Throws EquilibriumError when the initial cruise cannot be held.
NLPInstance transcribe(const BrakingProblem& prob, const RiderBallbotParams& p,
                       const Gains& g);

struct OptimalSolution {
  Trajectory trajectory;  // dense, resampled
  Trajectory knots;
  Eigen::VectorXd x;
  double J_star = 0.0;
  double t_F = 0.0;
  int iterations = 0;
  int outer_iterations = 0;
  double max_defect = 0.0;
  double kkt_residual = 0.0;
  bool converged = false;
  std::string message;
  DualWarmStart duals;
};

/// Solves the transcription from `init` (or the default guess).
OptimalSolution solve_nlp(const NLPInstance& inst,
                          const std::optional<Eigen::VectorXd>& init = std::nullopt,
                          const SolverOptions& opt = {},
                          const std::optional<DualWarmStart>& duals = std::nullopt);

/// Closed-loop replay of the optimal rider torque through the simulator.
struct ReplayCheck {
  SimResult sim;
  double J_replay = 0.0;     // effort over [0, t_F*]
  double final_speed = 0.0;  // |phi_dot| r_s at t_F* [m/s]
};

ReplayCheck replay_solution(const NLPInstance& inst, const OptimalSolution& sol,
                            double dt = 1e-3, double tail = 0.0);

}  // namespace ridebot
