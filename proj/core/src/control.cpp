#include "ridebot/control.hpp"

#include <algorithm>
#include <stdexcept>

#include "ridebot/linearize.hpp"
#include "ridebot/riccati.hpp"

namespace ridebot {

namespace {

void require_unit_interval(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string("sensitivity '") + name +
                                "' must lie in [0, 1]");
  }
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

void ControlScheme::validate() const {
  require_unit_interval(nu_z, "nu_z");
  std::visit(Overloaded{
                 [](const scheme::Baseline&) {},
                 [](const scheme::Hics1& s) { require_unit_interval(s.nu, "nu"); },
                 [](const scheme::Hics2& s) {
                   require_unit_interval(s.nu, "nu");
                   if (!(s.phi_dot_max > 0.0)) {
                     throw std::invalid_argument("phi_dot_max must be positive");
                   }
                 },
                 [](const scheme::Hacs1& s) { require_unit_interval(s.nu_P, "nu_P"); },
                 [](const scheme::Hacs2& s) { require_unit_interval(s.nu_I, "nu_I"); },
                 [](const scheme::Hacs3& s) {
                   require_unit_interval(s.nu_P, "nu_P");
                   require_unit_interval(s.nu_I, "nu_I");
                 },
             },
             law);
}

std::string ControlScheme::name() const {
  return std::visit(Overloaded{
                        [](const scheme::Baseline&) { return std::string("baseline"); },
                        [](const scheme::Hics1&) { return std::string("hics1"); },
                        [](const scheme::Hics2&) { return std::string("hics2"); },
                        [](const scheme::Hacs1&) { return std::string("hacs1"); },
                        [](const scheme::Hacs2&) { return std::string("hacs2"); },
                        [](const scheme::Hacs3&) { return std::string("hacs3"); },
                    },
                    law);
}

bool ControlScheme::has_integral() const {
  return std::holds_alternative<scheme::Hacs2>(law) ||
         std::holds_alternative<scheme::Hacs3>(law);
}

std::optional<double> ControlScheme::sensitivity() const {
  return std::visit(Overloaded{
                        [](const scheme::Baseline&) -> std::optional<double> { return std::nullopt; },
                        [](const scheme::Hics1& s) -> std::optional<double> { return s.nu; },
                        [](const scheme::Hics2& s) -> std::optional<double> { return s.nu; },
                        [](const scheme::Hacs1& s) -> std::optional<double> { return s.nu_P; },
                        [](const scheme::Hacs2& s) -> std::optional<double> { return s.nu_I; },
                        [](const scheme::Hacs3& s) -> std::optional<double> { return s.nu_P; },
                    },
                    law);
}

std::string ControlScheme::sensitivity_name() const {
  return std::visit(Overloaded{
                        [](const scheme::Baseline&) { return std::string("none"); },
                        [](const scheme::Hics1&) { return std::string("nu"); },
                        [](const scheme::Hics2&) { return std::string("nu"); },
                        [](const scheme::Hacs1&) { return std::string("nu_P"); },
                        [](const scheme::Hacs2&) { return std::string("nu_I"); },
                        [](const scheme::Hacs3&) { return std::string("nu_P"); },
                    },
                    law);
}

ControlScheme ControlScheme::from_name(std::string_view name, double nu,
                                       double nu_P, double nu_I) {
  ControlScheme s;
  if (name == "baseline") {
    s = baseline();
  } else if (name == "hics1") {
    s = hics1(nu);
  } else if (name == "hics2") {
    s = hics2(nu);
  } else if (name == "hacs1") {
    s = hacs1(nu_P);
  } else if (name == "hacs2") {
    s = hacs2(nu_I);
  } else if (name == "hacs3") {
    s = hacs3(nu_P, nu_I);
  } else {
    throw std::invalid_argument("unknown control scheme '" + std::string(name) +
                                "' (expected baseline|hics1|hics2|hacs1|hacs2|hacs3)");
  }
  return s;
}

double hics_torque(const PlanarState& s, const Gains& g,
                   const ControlScheme& sch) {
  if (!std::holds_alternative<scheme::Baseline>(sch.law) &&
      !std::holds_alternative<scheme::Hics1>(sch.law) &&
      !std::holds_alternative<scheme::Hics2>(sch.law)) {
    throw std::invalid_argument("hics_torque expects baseline, hics1 or hics2");
  }
  return stateless_control_torque<double>(s.to_vector(), 0.0, sch, g);
}

double hacs_command_speed(double tau_p, double tau_p_integral,
                          const ControlScheme& sch) {
  if (const auto* a1 = std::get_if<scheme::Hacs1>(&sch.law)) {
    return a1->nu_P * tau_p;
  }
  if (const auto* a2 = std::get_if<scheme::Hacs2>(&sch.law)) {
    return a2->nu_I * tau_p_integral;
  }
  if (const auto* a3 = std::get_if<scheme::Hacs3>(&sch.law)) {
    return a3->nu_P * tau_p + a3->nu_I * tau_p_integral;
  }
  throw std::invalid_argument("hacs_command_speed expects hacs1, hacs2 or hacs3");
}

HacsOutput hacs_torque(const PlanarState& s, double tau_p,
                       const ControllerState& cs, double dt, const Gains& g,
                       const ControlScheme& sch) {
  if (!(dt > 0.0)) throw std::invalid_argument("hacs_torque: dt must be positive");

  HacsOutput out;
  out.state = cs;
  if (cs.has_sample) {
    out.state.tau_p_integral += 0.5 * dt * (cs.last_tau_p + tau_p);
  }
  out.state.last_tau_p = tau_p;
  out.state.has_sample = true;

  out.phi_dot_c = hacs_command_speed(tau_p, out.state.tau_p_integral, sch);
  out.tau_r = -g.k1 * s.theta - g.k2 * s.theta_dot +
              g.k3 * (out.phi_dot_c - s.phi_dot);
  return out;
}

double yaw_torque(const YawState& ys, double nu_z, const Gains& g) {
  return nu_z * (g.k1z * (ys.zeta_z - ys.theta_z) + g.k2z * (0.0 - ys.theta_z_dot));
}

Gains lqr_gains(const Eigen::Matrix3d& A, const Eigen::Vector3d& B,
                const Eigen::Matrix3d& Q, double R) {
  const CareSolution care =
      solve_care(A, B, Q, Eigen::MatrixXd::Constant(1, 1, R));
  Gains g;
  g.k1 = care.K(0, 0);
  g.k2 = care.K(0, 1);
  g.k3 = care.K(0, 2);
  return g;
}

Gains synthesize_gains(const RiderBallbotParams& p, const LqrWeights& w) {
  const RigidRiderModel m = linearize_rigid_rider(p);
  const Eigen::Matrix3d Q =
      Eigen::Vector3d(w.theta, w.theta_dot, w.phi_dot).asDiagonal();
  Gains g = lqr_gains(m.A, m.B, Q, w.tau);

  Eigen::Matrix2d Az;
  Az << 0.0, 1.0, 0.0, 0.0;
  const Eigen::Vector2d Bz(0.0, 1.0 / p.I_z);
  const Eigen::Matrix2d Qz = Eigen::Vector2d(w.theta_z, w.theta_z_dot).asDiagonal();
  const CareSolution yaw =
      solve_care(Az, Bz, Qz, Eigen::MatrixXd::Constant(1, 1, w.tau_z));
  g.k1z = yaw.K(0, 0);
  g.k2z = yaw.K(0, 1);
  return g;
}

double saturate(double torque, double limit, bool* clamped) {
  const double out = std::clamp(torque, -limit, limit);
  if (clamped != nullptr) *clamped = (out != torque);
  return out;
}

}  // namespace ridebot
