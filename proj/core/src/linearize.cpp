#include "ridebot/linearize.hpp"

#include <string>

#include <Eigen/LU>

#include "ridebot/autodiff.hpp"
#include "ridebot/dynamics.hpp"

namespace ridebot {

LinearModel linearize(const RiderBallbotParams& p, const PlanarState& s0,
                      const InputTorques& u0, double tolerance) {
  const Eigen::Vector3d qdd0 = eom_forward(s0, u0, p);
  if (!(qdd0.cwiseAbs().maxCoeff() <= tolerance)) {
    throw NotAnEquilibrium("linearization point is not an equilibrium: |qdd| = " +
                           std::to_string(qdd0.cwiseAbs().maxCoeff()));
  }

  constexpr int kVars = 8;
  const PlanarState::Vector x0 = s0.to_vector();
  Vec6<AdScalar> s;
  for (int i = 0; i < 6; ++i) s[i] = ad_variable(x0[i], kVars, i);
  const AdScalar tau_R = ad_variable(u0.tau_R, kVars, 6);
  const AdScalar tau = ad_variable(u0.tau, kVars, 7);

  const Vec6<AdScalar> ds = kernel::state_derivative(s, tau_R, tau, p);
  LinearModel lin;
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) lin.A(r, c) = ds[r].derivatives()[c];
    lin.B(r, 0) = ds[r].derivatives()[6];
    lin.B(r, 1) = ds[r].derivatives()[7];
  }
  return lin;
}

RigidRiderModel linearize_rigid_rider(const RiderBallbotParams& p) {
  // Lump the torso onto the chassis: one body of mass m_c + m_r whose first
  // moment and inertia about the ball centre combine both.
  const double m_body = p.m_c + p.m_r;
  const double first_moment = p.m_c * p.l_c + p.m_r * (p.h_s + p.l_r);
  const double inertia = p.I_c + p.m_c * p.l_c * p.l_c + p.I_r +
                         p.m_r * (p.h_s + p.l_r) * (p.h_s + p.l_r);

  // q = (theta, phi); linearized about upright rest
  Eigen::Matrix2d M;
  M(0, 0) = inertia;
  M(1, 1) = p.I_s + (p.m_s + m_body) * p.r_s * p.r_s;
  M(0, 1) = M(1, 0) = first_moment * p.r_s;
  const Eigen::Matrix2d Minv = M.inverse();

  // M qdd = [m g l theta - tau, tau - b phi_dot]
  const Eigen::Vector2d d_theta = Minv * Eigen::Vector2d(first_moment * p.g, 0.0);
  const Eigen::Vector2d d_phidot = Minv * Eigen::Vector2d(0.0, -p.b_phi);
  const Eigen::Vector2d d_tau = Minv * Eigen::Vector2d(-1.0, 1.0);

  RigidRiderModel m;
  m.A << 0.0, 1.0, 0.0,
         d_theta[0], 0.0, d_phidot[0],
         d_theta[1], 0.0, d_phidot[1];
  m.B << 0.0, d_tau[0], d_tau[1];
  return m;
}

}  // namespace ridebot
