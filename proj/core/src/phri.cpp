#include "ridebot/phri.hpp"

#include <cmath>

#include <Eigen/Cholesky>

namespace ridebot {

PHRIWrench phri_wrench(const PlanarState& s, const Eigen::Vector3d& q_ddot,
                       double tau_R, const RiderBallbotParams& p) {
  const double st = std::sin(s.theta), ct = std::cos(s.theta);
  const double sz = std::sin(s.zeta), cz = std::cos(s.zeta);
  const double zdd = q_ddot[0], tdd = q_ddot[1], pdd = q_ddot[2];

  // torso COM acceleration, forward and vertical
  const double ax = p.r_s * pdd + p.h_s * (ct * tdd - st * s.theta_dot * s.theta_dot) +
                    p.l_r * (cz * zdd - sz * s.zeta_dot * s.zeta_dot);
  const double az = -p.h_s * (st * tdd + ct * s.theta_dot * s.theta_dot) -
                    p.l_r * (sz * zdd + cz * s.zeta_dot * s.zeta_dot);

  // chassis-on-torso pin force F_j satisfies m a = F_j + m g; the seat feels -F_j
  PHRIWrench w;
  w.F_py = -p.m_r * ax;
  w.F_pz = -p.m_r * (az + p.g);
  w.tau_py = seat_pitch_moment(tau_R);
  return w;
}

Eigen::Vector2d isolated_ballbot_accelerations(const PlanarState& s,
                                               double tau,
                                               const PHRIWrench& seat_wrench,
                                               const RiderBallbotParams& p) {
  const double st = std::sin(s.theta), ct = std::cos(s.theta);
  const double c = p.m_c * p.l_c * p.r_s;

  Eigen::Matrix2d M;
  M(0, 0) = p.I_c + p.m_c * p.l_c * p.l_c;
  M(1, 1) = p.I_s + (p.m_s + p.m_c) * p.r_s * p.r_s;
  M(0, 1) = M(1, 0) = c * ct;

  Eigen::Vector2d rhs;
  rhs[0] = p.m_c * p.l_c * p.g * st - tau +
           p.h_s * (seat_wrench.F_py * ct - seat_wrench.F_pz * st) +
           seat_wrench.tau_py;
  rhs[1] = c * st * s.theta_dot * s.theta_dot + tau - p.b_phi * s.phi_dot +
           p.r_s * seat_wrench.F_py;
  return M.ldlt().solve(rhs);
}

}  // namespace ridebot
