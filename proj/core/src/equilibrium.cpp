#include "ridebot/equilibrium.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include "ridebot/dynamics.hpp"
#include "ridebot/phri.hpp"
#include "ridebot/trajectory.hpp"

namespace ridebot {

namespace {

constexpr double kResidualTolerance = 1e-10;

struct Unknowns {
  double zeta, theta, tau_R, integral;
};

// Maps the root-finder vector onto the physical unknowns.
struct EquilibriumFunctor {
  const ControlScheme& sch;
  const Gains& g;
  const RiderBallbotParams& p;
  double phi_dot;

  [[nodiscard]] int size() const { return 3; }

  [[nodiscard]] Unknowns unpack(const Eigen::VectorXd& z) const {
    if (sch.has_integral()) return {z[0], z[1], 0.0, z[2]};
    return {z[0], z[1], z[2], 0.0};
  }

  [[nodiscard]] double drive_torque(const PlanarState& s, const Unknowns& u,
                                    double* phi_dot_c) const {
    if (sch.has_integral()) {
      const double tau_p = seat_pitch_moment(u.tau_R);
      *phi_dot_c = hacs_command_speed(tau_p, u.integral, sch);
      return -g.k1 * s.theta - g.k2 * s.theta_dot + g.k3 * (*phi_dot_c - s.phi_dot);
    }
    return stateless_control_torque<double>(s.to_vector(), u.tau_R, sch, g, phi_dot_c);
  }

  [[nodiscard]] Eigen::Vector3d residual(const Unknowns& u) const {
    const PlanarState s{u.zeta, u.theta, 0.0, 0.0, 0.0, phi_dot};
    double phi_dot_c = 0.0;
    const double tau = drive_torque(s, u, &phi_dot_c);
    return eom_forward(s, {u.tau_R, tau}, p);
  }

  int operator()(const Eigen::VectorXd& z, Eigen::VectorXd& fvec) const {
    fvec = residual(unpack(z));
    return 0;
  }
};

}  // namespace

Equilibrium find_equilibrium(const ControlScheme& sch, const Gains& g,
                             const RiderBallbotParams& p, double v_target,
                             const EquilibriumLimits& limits) {
  if (!(v_target >= 0.0)) throw std::invalid_argument("v_target must be >= 0");
  sch.validate();
  p.validate();

  const double phi_dot = v_target / p.r_s;
  EquilibriumFunctor f{sch, g, p, phi_dot};

  Eigen::VectorXd z = Eigen::VectorXd::Zero(3);
  if (sch.has_integral()) {
    const double nu_I = std::holds_alternative<scheme::Hacs2>(sch.law)
                            ? std::get<scheme::Hacs2>(sch.law).nu_I
                            : std::get<scheme::Hacs3>(sch.law).nu_I;
    if (phi_dot != 0.0 && nu_I == 0.0) {
      throw EquilibriumError("no cruise equilibrium: nu_I = 0 cannot hold a command speed");
    }
    z[2] = nu_I > 0.0 ? phi_dot / nu_I : 0.0;
  }

  Eigen::VectorXd fz;
  f(z, fz);
  if (fz.norm() > 0.0) {
    Eigen::HybridNonLinearSolver<EquilibriumFunctor> solver(f);
    solver.parameters.xtol = 1e-14;
    solver.parameters.maxfev = 2000;
    solver.hybrd1(z, 1e-14);
    // polish with Newton steps on a central-difference Jacobian
    for (int it = 0; it < 5; ++it) {
      f(z, fz);
      if (fz.cwiseAbs().maxCoeff() < 1e-13) break;
      Eigen::Matrix3d J;
      for (int j = 0; j < 3; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(z[j]));
        Eigen::VectorXd zp = z, zm = z, fp, fm;
        zp[j] += h;
        zm[j] -= h;
        f(zp, fp);
        f(zm, fm);
        J.col(j) = (fp - fm) / (2.0 * h);
      }
      z -= J.fullPivLu().solve(fz);
    }
  }

  const Unknowns u = f.unpack(z);
  Equilibrium eq;
  eq.state = PlanarState{u.zeta, u.theta, 0.0, 0.0, 0.0, phi_dot};
  eq.tau_R_hold = u.tau_R;
  eq.tau_p = seat_pitch_moment(u.tau_R);
  eq.tau = f.drive_torque(eq.state, u, &eq.phi_dot_c);
  if (sch.has_integral()) {
    eq.controller.tau_p_integral = u.integral;
    eq.controller.last_tau_p = eq.tau_p;
    eq.controller.has_sample = true;
  }

  // independent re-check against the dynamics
  const Eigen::Vector3d qdd = eom_forward(eq.state, {eq.tau_R_hold, eq.tau}, p);
  if (!z.allFinite() || !(qdd.cwiseAbs().maxCoeff() < kResidualTolerance)) {
    throw EquilibriumError("root finder did not reach an equilibrium at v = " +
                           format_double(v_target) + " m/s (|qdd| = " +
                           format_double(qdd.cwiseAbs().maxCoeff()) + ")");
  }
  if (std::abs(eq.tau_R_hold) > limits.tau_R_max) {
    throw EquilibriumError("hold torque " + format_double(eq.tau_R_hold) +
                           " N m exceeds tau_R_max " + format_double(limits.tau_R_max));
  }
  if (std::abs(eq.state.zeta) > limits.zeta_max ||
      std::abs(eq.state.theta) > limits.theta_max) {
    throw EquilibriumError("equilibrium posture outside admissible range (zeta = " +
                           format_double(eq.state.zeta) + ", theta = " +
                           format_double(eq.state.theta) + ")");
  }
  return eq;
}

}  // namespace ridebot
