#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

#include "ridebot/autodiff.hpp"
#include "ridebot/model.hpp"

namespace ridebot {

template <typename S>
using Vec3 = Eigen::Matrix<S, 3, 1>;
template <typename S>
using Mat3 = Eigen::Matrix<S, 3, 3>;
template <typename S>
using Vec6 = Eigen::Matrix<S, 6, 1>;

/// Thrown when the mass matrix is numerically singular. Unreachable for
/// valid parameters; it signals a parameter bug.
class SingularMassMatrix : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace kernel {

// Scalar-generic pieces of the Euler-Lagrange model, q = (zeta, theta, phi).
// Instantiated with double and with forward-mode autodiff scalars.

template <typename S>
Mat3<S> mass_matrix(const Vec3<S>& q, const RiderBallbotParams& p) {
  using std::cos;
  const double a = p.m_r * p.h_s * p.l_r;
  const double b = p.m_r * p.r_s * p.l_r;
  const double c = p.chassis_moment() * p.r_s;
  Mat3<S> M;
  M(0, 0) = constant_like(p.I_r + p.m_r * p.l_r * p.l_r, q[0]);
  M(1, 1) = constant_like(p.I_c + p.m_c * p.l_c * p.l_c + p.m_r * p.h_s * p.h_s, q[0]);
  M(2, 2) = constant_like(p.I_s + p.total_mass() * p.r_s * p.r_s, q[0]);
  M(0, 1) = a * cos(q[1] - q[0]);
  M(0, 2) = b * cos(q[0]);
  M(1, 2) = c * cos(q[1]);
  M(1, 0) = M(0, 1);
  M(2, 0) = M(0, 2);
  M(2, 1) = M(1, 2);
  return M;
}

/// Partial derivative of M with respect to coordinate k.
template <typename S>
Mat3<S> mass_matrix_partial(const Vec3<S>& q, int k,
                            const RiderBallbotParams& p) {
  using std::sin;
  const double a = p.m_r * p.h_s * p.l_r;
  const double b = p.m_r * p.r_s * p.l_r;
  const double c = p.chassis_moment() * p.r_s;
  Mat3<S> D = Mat3<S>::Zero();
  if (k == 0) {
    D(0, 1) = D(1, 0) = a * sin(q[1] - q[0]);
    D(0, 2) = D(2, 0) = -b * sin(q[0]);
  } else if (k == 1) {
    D(0, 1) = D(1, 0) = -a * sin(q[1] - q[0]);
    D(1, 2) = D(2, 1) = -c * sin(q[1]);
  }
  return D;
}

/// Centrifugal/Coriolis generalized forces C(q, qd) qd.
template <typename S>
Vec3<S> velocity_terms(const Vec3<S>& q, const Vec3<S>& qd,
                       const RiderBallbotParams& p) {
  using std::sin;
  const double a = p.m_r * p.h_s * p.l_r;
  const double b = p.m_r * p.r_s * p.l_r;
  const double c = p.chassis_moment() * p.r_s;
  const S s_rel = sin(q[1] - q[0]);
  Vec3<S> h;
  h[0] = -a * s_rel * qd[1] * qd[1];
  h[1] = a * s_rel * qd[0] * qd[0];
  h[2] = -b * sin(q[0]) * qd[0] * qd[0] - c * sin(q[1]) * qd[1] * qd[1];
  return h;
}

template <typename S>
Vec3<S> gravity_terms(const Vec3<S>& q, const RiderBallbotParams& p) {
  using std::sin;
  Vec3<S> G;
  G[0] = -p.m_r * p.g * p.l_r * sin(q[0]);
  G[1] = -p.chassis_moment() * p.g * sin(q[1]);
  G[2] = constant_like(0.0, q[0]);
  return G;
}

/// Generalized forces of the actuators and rolling friction. The drivetrain
/// torque acts between chassis and ball, the rider torque between torso and
/// chassis.
template <typename S>
Vec3<S> generalized_forces(const Vec3<S>& qd, const S& tau_R, const S& tau,
                           const RiderBallbotParams& p) {
  Vec3<S> Q;
  Q[0] = tau_R;
  Q[1] = -tau_R - tau;
  Q[2] = tau - p.b_phi * qd[2];
  return Q;
}

/// Solves M x = rhs for symmetric 3x3 M by cofactors, so that autodiff
/// scalars flow through without a pivoting factorization.
template <typename S>
Vec3<S> solve_symmetric3(const Mat3<S>& M, const Vec3<S>& rhs, S* det_out) {
  const S c00 = M(1, 1) * M(2, 2) - M(1, 2) * M(2, 1);
  const S c01 = M(1, 2) * M(2, 0) - M(1, 0) * M(2, 2);
  const S c02 = M(1, 0) * M(2, 1) - M(1, 1) * M(2, 0);
  const S c11 = M(0, 0) * M(2, 2) - M(0, 2) * M(2, 0);
  const S c12 = M(0, 2) * M(1, 0) - M(0, 0) * M(1, 2);
  const S c22 = M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
  const S det = M(0, 0) * c00 + M(0, 1) * c01 + M(0, 2) * c02;
  if (det_out != nullptr) *det_out = det;
  Vec3<S> x;
  x[0] = (c00 * rhs[0] + c01 * rhs[1] + c02 * rhs[2]) / det;
  x[1] = (c01 * rhs[0] + c11 * rhs[1] + c12 * rhs[2]) / det;
  x[2] = (c02 * rhs[0] + c12 * rhs[1] + c22 * rhs[2]) / det;
  return x;
}

/// Accelerations from M qdd + C qd + G = Q.
template <typename S>
Vec3<S> accelerations(const Vec6<S>& s, const S& tau_R, const S& tau,
                      const RiderBallbotParams& p) {
  const Vec3<S> q = s.template head<3>();
  const Vec3<S> qd = s.template tail<3>();
  const Vec3<S> rhs = generalized_forces(qd, tau_R, tau, p) -
                      velocity_terms(q, qd, p) - gravity_terms(q, p);
  return solve_symmetric3(mass_matrix(q, p), rhs, static_cast<S*>(nullptr));
}

/// First-order form ds/dt = (qd, qdd).
template <typename S>
Vec6<S> state_derivative(const Vec6<S>& s, const S& tau_R, const S& tau,
                         const RiderBallbotParams& p) {
  Vec6<S> ds;
  ds.template head<3>() = s.template tail<3>();
  ds.template tail<3>() = accelerations(s, tau_R, tau, p);
  return ds;
}

}  // namespace kernel

using Accelerations = Eigen::Vector3d;

Eigen::Matrix3d mass_matrix(const Eigen::Vector3d& q,
                            const RiderBallbotParams& p);

/// Christoffel-form Coriolis matrix; C(q, qd) qd equals the velocity terms
/// and dM/dt - 2C is skew-symmetric.
Eigen::Matrix3d coriolis_matrix(const Eigen::Vector3d& q,
                                const Eigen::Vector3d& qd,
                                const RiderBallbotParams& p);

/// Time derivative of M along qd.
Eigen::Matrix3d mass_matrix_rate(const Eigen::Vector3d& q,
                                 const Eigen::Vector3d& qd,
                                 const RiderBallbotParams& p);

Eigen::Vector3d gravity_vector(const Eigen::Vector3d& q,
                               const RiderBallbotParams& p);

/// Accelerations (zeta_ddot, theta_ddot, phi_ddot).
/// Throws SingularMassMatrix if M(q) cannot be inverted.
Accelerations eom_forward(const PlanarState& s, const InputTorques& u,
                          const RiderBallbotParams& p);

PlanarState::Vector state_derivative(const PlanarState::Vector& s,
                                     const InputTorques& u,
                                     const RiderBallbotParams& p);

/// Kinetic plus potential energy, zero at the upright rest configuration.
double total_energy(const PlanarState& s, const RiderBallbotParams& p);

/// Rigid-rotor yaw model, I_z theta_z_ddot = tau_z.
double yaw_eom(const YawState& ys, double tau_z, const RiderBallbotParams& p);

}  // namespace ridebot
