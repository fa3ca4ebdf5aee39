#pragma once

#include <stdexcept>

#include <Eigen/Core>

#include "ridebot/model.hpp"

namespace ridebot {

class NotAnEquilibrium : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LinearModel {
  Eigen::Matrix<double, 6, 6> A;
  Eigen::Matrix<double, 6, 2> B;  // columns: tau_R, tau
};

/// Jacobians of the first-order dynamics at (s0, u0), evaluated by forward
/// autodiff. Throws NotAnEquilibrium unless |qdd(s0, u0)| <= tolerance.
LinearModel linearize(const RiderBallbotParams& p, const PlanarState& s0,
                      const InputTorques& u0, double tolerance = 1e-8);

/// Rider held rigidly to the chassis (zeta == theta): the lumped
/// single-body ballbot used for balance-gain synthesis. States are
/// (theta, theta_dot, phi_dot); the input is the drivetrain torque.
struct RigidRiderModel {
  Eigen::Matrix3d A;
  Eigen::Vector3d B;
};

RigidRiderModel linearize_rigid_rider(const RiderBallbotParams& p);

}  // namespace ridebot
