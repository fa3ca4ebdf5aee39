#pragma once

#include <Eigen/Core>

#include "ridebot/model.hpp"

namespace ridebot {

/// Pitch moment the torso applies to the seat centre. The seat centre is the
/// torso pivot, so the pin force has no moment arm and only the reaction to
/// the rider's own joint torque remains.
template <typename S>
S seat_pitch_moment(const S& tau_R) {
  return -tau_R;
}

/// Newton-Euler on the isolated torso: the wrench it exerts on the seat given
/// the coupled state, accelerations and rider torque.
PHRIWrench phri_wrench(const PlanarState& s, const Eigen::Vector3d& q_ddot,
                       double tau_R, const RiderBallbotParams& p);

/// Chassis-plus-ball model with the rider replaced by the wrench it applies to
/// the seat. Returns (theta_ddot, phi_ddot).
Eigen::Vector2d isolated_ballbot_accelerations(const PlanarState& s,
                                               double tau,
                                               const PHRIWrench& seat_wrench,
                                               const RiderBallbotParams& p);

}  // namespace ridebot
