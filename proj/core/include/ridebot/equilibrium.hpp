#pragma once

#include <stdexcept>

#include "ridebot/control.hpp"
#include "ridebot/model.hpp"

namespace ridebot {

class EquilibriumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Steady cruise under a control law with a constant rider hold torque.
struct Equilibrium {
  PlanarState state;
  double tau_R_hold = 0.0;
  double tau = 0.0;         // drivetrain torque at the equilibrium
  double tau_p = 0.0;       // seat pitch moment
  double phi_dot_c = 0.0;   // command speed (HACS laws)
  ControllerState controller;  // integral value for HACS-2/3
};

struct EquilibriumLimits {
  double tau_R_max = 60.0;
  double zeta_max = 1.2;   // reject solutions with the torso nearly horizontal
  double theta_max = 1.2;
};

/// Cruise at v_target with all accelerations zero. Unknowns are torso lean,
/// chassis tilt and hold torque, plus the integral value for HACS-2/3 (whose
/// hold torque must vanish for the integral to stay constant). The root is
/// re-checked by direct evaluation of the dynamics, |qdd| < 1e-10.
/// Throws EquilibriumError when no admissible root exists.
Equilibrium find_equilibrium(const ControlScheme& sch, const Gains& g,
                             const RiderBallbotParams& p, double v_target,
                             const EquilibriumLimits& limits = {});

}  // namespace ridebot
