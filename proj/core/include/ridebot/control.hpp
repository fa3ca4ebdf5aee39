#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>

#include <Eigen/Core>

#include "ridebot/autodiff.hpp"
#include "ridebot/model.hpp"
#include "ridebot/phri.hpp"

namespace ridebot {

/// Ball speed used to normalise HICS-2, 17.6 rad/s (2 m/s).
inline constexpr double kDefaultPhiDotMax = 17.6;

/// Balance and yaw feedback gains. Translation law:
///   tau_r = k1 (0 - theta) + k2 (0 - theta_dot) + k3 (phi_dot_ref - phi_dot)
struct Gains {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double k1z = 0.0;
  double k2z = 0.0;
};

/// Quadratic weights for synthesising Gains.
struct LqrWeights {
  double theta = 1.0 / (0.05 * 0.05);
  double theta_dot = 1.0 / (0.5 * 0.5);
  double phi_dot = 1.0 / (3.0 * 3.0);
  double tau = 1.0 / (20.0 * 20.0);
  double theta_z = 1.0 / (0.1 * 0.1);
  double theta_z_dot = 1.0 / (1.0 * 1.0);
  double tau_z = 1.0 / (10.0 * 10.0);
};

namespace scheme {
struct Baseline {};
struct Hics1 {
  double nu = 1.0;
};
struct Hics2 {
  double nu = 1.0;
  double phi_dot_max = kDefaultPhiDotMax;
};
struct Hacs1 {
  double nu_P = 0.0;
};
struct Hacs2 {
  double nu_I = 0.0;
};
struct Hacs3 {
  double nu_P = 0.0;
  double nu_I = 0.0;
};
}  // namespace scheme

/// Which speed-feedback rule the balancing controller runs.
struct ControlScheme {
  using Variant = std::variant<scheme::Baseline, scheme::Hics1, scheme::Hics2,
                               scheme::Hacs1, scheme::Hacs2, scheme::Hacs3>;
  Variant law = scheme::Baseline{};
  double nu_z = 1.0;  // yaw sensitivity

  /// Throws std::invalid_argument if a sensitivity lies outside [0, 1] or
  /// phi_dot_max is not positive.
  void validate() const;

  /// baseline | hics1 | hics2 | hacs1 | hacs2 | hacs3
  [[nodiscard]] std::string name() const;
  /// True when the law integrates the interaction moment.
  [[nodiscard]] bool has_integral() const;
  /// The scalar that a sensitivity sweep varies (nu or nu_P), if any.
  [[nodiscard]] std::optional<double> sensitivity() const;
  [[nodiscard]] std::string sensitivity_name() const;

  static ControlScheme baseline() { return {scheme::Baseline{}}; }
  static ControlScheme hics1(double nu) { return {scheme::Hics1{nu}}; }
  static ControlScheme hics2(double nu, double phi_dot_max = kDefaultPhiDotMax) {
    return {scheme::Hics2{nu, phi_dot_max}};
  }
  static ControlScheme hacs1(double nu_P) { return {scheme::Hacs1{nu_P}}; }
  static ControlScheme hacs2(double nu_I) { return {scheme::Hacs2{nu_I}}; }
  static ControlScheme hacs3(double nu_P, double nu_I) {
    return {scheme::Hacs3{nu_P, nu_I}};
  }
  /// Builds a scheme from its name, setting the single sensitivity
  /// (nu, nu_P or nu_I) for one-parameter laws.
  static ControlScheme from_name(std::string_view name, double nu = 1.0,
                                 double nu_P = 0.0, double nu_I = 0.0);
};

/// Running integral of the interaction moment for HACS-2/3.
struct ControllerState {
  double tau_p_integral = 0.0;  // N m s
  double last_tau_p = 0.0;
  bool has_sample = false;
};

/// Output of an admittance law step.
struct HacsOutput {
  double tau_r = 0.0;
  ControllerState state;
  double phi_dot_c = 0.0;
};

/// HICS-2 normalised speed. Uses |phi_dot| so the speed term keeps the sign
/// of phi_dot: khat3 (0 - phi_dot) = -nu k3 phi_dot |phi_dot| / phi_dot_max.
template <typename S>
S hics2_gain_scale(const S& phi_dot, double nu, double phi_dot_max) {
  using std::abs;
  return nu * abs(phi_dot) / phi_dot_max;
}

/// Baseline / HICS / HACS-1 torque as an algebraic function of the state and
/// rider torque (no internal state). Scalar-generic so collocation can
/// differentiate through it. Throws std::logic_error for HACS-2/3.
template <typename S>
S stateless_control_torque(const Eigen::Matrix<S, 6, 1>& s, const S& tau_R,
                           const ControlScheme& sch, const Gains& g,
                           S* phi_dot_c_out = nullptr) {
  const S& theta = s[kTheta];
  const S& theta_dot = s[kThetaDot];
  const S& phi_dot = s[kPhiDot];
  S k3_hat = constant_like(g.k3, phi_dot);
  S phi_dot_c = constant_like(0.0, phi_dot);
  if (const auto* h1 = std::get_if<scheme::Hics1>(&sch.law)) {
    k3_hat = h1->nu * g.k3;
  } else if (const auto* h2 = std::get_if<scheme::Hics2>(&sch.law)) {
    k3_hat = hics2_gain_scale(phi_dot, h2->nu, h2->phi_dot_max) * g.k3;
  } else if (const auto* a1 = std::get_if<scheme::Hacs1>(&sch.law)) {
    phi_dot_c = a1->nu_P * seat_pitch_moment(tau_R);
  } else if (!std::holds_alternative<scheme::Baseline>(sch.law)) {
    throw std::logic_error("scheme " + sch.name() +
                           " carries integral state; use hacs_torque");
  }
  if (phi_dot_c_out != nullptr) *phi_dot_c_out = phi_dot_c;
  return -g.k1 * theta - g.k2 * theta_dot + k3_hat * (phi_dot_c - phi_dot);
}

/// Impedance laws: Baseline, HICS-1, HICS-2.
double hics_torque(const PlanarState& s, const Gains& g,
                   const ControlScheme& sch);

/// Admittance laws HACS-1/2/3. The interaction integral advances by the
/// trapezoidal rule from the previous sample; the first call only records
/// the sample.
HacsOutput hacs_torque(const PlanarState& s, double tau_p,
                       const ControllerState& cs, double dt, const Gains& g,
                       const ControlScheme& sch);

/// Command speed for HACS laws given the moment and the integral value.
double hacs_command_speed(double tau_p, double tau_p_integral,
                          const ControlScheme& sch);

/// Yaw law: tau_rz = nu_z (k1z (zeta_z - theta_z) + k2z (0 - theta_z_dot)).
double yaw_torque(const YawState& ys, double nu_z, const Gains& g);

/// LQR gains for the reduced balance model with states
/// (theta, theta_dot, phi_dot) and one input. Throws RiccatiError.
Gains lqr_gains(const Eigen::Matrix3d& A, const Eigen::Vector3d& B,
                const Eigen::Matrix3d& Q, double R);

/// Balance gains from the rigid-rider linearization plus yaw gains from the
/// rotor model, using `w` as LQR weights.
Gains synthesize_gains(const RiderBallbotParams& p, const LqrWeights& w = {});

/// Clamps to [-limit, limit]; sets `*clamped` when clamping happened.
double saturate(double torque, double limit, bool* clamped);

}  // namespace ridebot
