#include "ridebot/dynamics.hpp"

#include <array>
#include <cmath>

namespace ridebot {

Eigen::Matrix3d mass_matrix(const Eigen::Vector3d& q,
                            const RiderBallbotParams& p) {
  return kernel::mass_matrix<double>(q, p);
}

Eigen::Matrix3d coriolis_matrix(const Eigen::Vector3d& q,
                                const Eigen::Vector3d& qd,
                                const RiderBallbotParams& p) {
  std::array<Eigen::Matrix3d, 3> dM;
  for (int k = 0; k < 3; ++k) dM[k] = kernel::mass_matrix_partial<double>(q, k, p);

  Eigen::Matrix3d C = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        C(i, j) += 0.5 * (dM[k](i, j) + dM[j](i, k) - dM[i](j, k)) * qd[k];
      }
    }
  }
  return C;
}

Eigen::Matrix3d mass_matrix_rate(const Eigen::Vector3d& q,
                                 const Eigen::Vector3d& qd,
                                 const RiderBallbotParams& p) {
  Eigen::Matrix3d Md = Eigen::Matrix3d::Zero();
  for (int k = 0; k < 3; ++k) {
    Md += kernel::mass_matrix_partial<double>(q, k, p) * qd[k];
  }
  return Md;
}

Eigen::Vector3d gravity_vector(const Eigen::Vector3d& q,
                               const RiderBallbotParams& p) {
  return kernel::gravity_terms<double>(q, p);
}

Accelerations eom_forward(const PlanarState& s, const InputTorques& u,
                          const RiderBallbotParams& p) {
  const PlanarState::Vector x = s.to_vector();
  const Eigen::Vector3d q = x.head<3>();
  const Eigen::Vector3d qd = x.tail<3>();
  const Eigen::Matrix3d M = kernel::mass_matrix<double>(q, p);
  const Eigen::Vector3d rhs =
      kernel::generalized_forces<double>(qd, u.tau_R, u.tau, p) -
      kernel::velocity_terms<double>(q, qd, p) -
      kernel::gravity_terms<double>(q, p);
  double det = 0.0;
  Eigen::Vector3d qdd = kernel::solve_symmetric3<double>(M, rhs, &det);
  if (!(std::abs(det) > 1e-12 * M.cwiseAbs().maxCoeff())) {
    throw SingularMassMatrix("mass matrix is singular; check model parameters");
  }
  return qdd;
}

PlanarState::Vector state_derivative(const PlanarState::Vector& s,
                                     const InputTorques& u,
                                     const RiderBallbotParams& p) {
  PlanarState::Vector ds;
  ds.head<3>() = s.tail<3>();
  ds.tail<3>() = eom_forward(PlanarState::from_vector(s), u, p);
  return ds;
}

double total_energy(const PlanarState& s, const RiderBallbotParams& p) {
  const PlanarState::Vector x = s.to_vector();
  const Eigen::Vector3d q = x.head<3>();
  const Eigen::Vector3d qd = x.tail<3>();
  const double kinetic = 0.5 * qd.dot(mass_matrix(q, p) * qd);
  const double potential =
      p.m_r * p.g * p.l_r * (std::cos(s.zeta) - 1.0) +
      p.chassis_moment() * p.g * (std::cos(s.theta) - 1.0);
  return kinetic + potential;
}

double yaw_eom(const YawState& /*ys*/, double tau_z,
               const RiderBallbotParams& p) {
  return tau_z / p.I_z;
}

}  // namespace ridebot
