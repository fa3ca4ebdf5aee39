#pragma once

#include <Eigen/Core>

namespace ridebot {

/// Inertial and geometric parameters of the planar rider-ballbot model.
///
/// Three bodies: the spherical wheel, the chassis (which carries the rider's
/// lower body) pinned at the ball centre, and the rider torso pinned at the
/// seat pivot a distance `h_s` up the chassis axis. SI units throughout.
struct RiderBallbotParams {
  double m_s = 4.0;               // ball mass [kg]
  double r_s = 2.0 / 17.6;        // ball radius [m]; 17.6 rad/s <-> 2 m/s
  double I_s = 2.0 / 3.0 * 4.0 * (2.0 / 17.6) * (2.0 / 17.6);
  double m_c = 30.0 + 60.0 * (1.0 - 0.678);  // chassis + lower body [kg]
  double l_c = 0.3;               // ball centre to chassis COM [m]
  double I_c = (30.0 + 60.0 * (1.0 - 0.678)) * 0.36 / 12.0;
  double m_r = 0.678 * 60.0;      // head + trunk + arms [kg]
  double l_r = 0.3;               // seat pivot to torso COM [m]
  double I_r = 0.678 * 60.0 * 0.36 / 12.0;
  double h_s = 0.45;              // ball centre to seat pivot [m]
  double I_z = 3.0;               // yaw inertia of the assembly [kg m^2]
  double b_phi = 0.0;             // viscous rolling friction [N m s/rad]
  double g = 9.81;

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;

  /// Chassis-side first moment about the ball centre, m_c l_c + m_r h_s.
  [[nodiscard]] double chassis_moment() const { return m_c * l_c + m_r * h_s; }
  [[nodiscard]] double total_mass() const { return m_s + m_c + m_r; }
};

/// Preset for a 60 kg, 1.8 m rider on a 30 kg chassis.
RiderBallbotParams default_rider();

/// Sagittal state. `zeta` is the torso lean measured from vertical, `theta`
/// the chassis tilt from vertical, `phi` the absolute ball rotation, so the
/// ball centre sits at x = r_s * phi. Positive angles pitch forward.
struct PlanarState {
  double zeta = 0.0;
  double theta = 0.0;
  double phi = 0.0;
  double zeta_dot = 0.0;
  double theta_dot = 0.0;
  double phi_dot = 0.0;

  using Vector = Eigen::Matrix<double, 6, 1>;

  [[nodiscard]] Vector to_vector() const {
    Vector v;
    v << zeta, theta, phi, zeta_dot, theta_dot, phi_dot;
    return v;
  }
  static PlanarState from_vector(const Eigen::Ref<const Vector>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
  }
  [[nodiscard]] bool is_finite() const { return to_vector().allFinite(); }

  friend bool operator==(const PlanarState&, const PlanarState&) = default;
};

/// Index of each coordinate inside the 6-vector form of PlanarState.
enum StateIndex : int {
  kZeta = 0,
  kTheta = 1,
  kPhi = 2,
  kZetaDot = 3,
  kThetaDot = 4,
  kPhiDot = 5,
};

struct YawState {
  double theta_z = 0.0;
  double theta_z_dot = 0.0;
  double zeta_z = 0.0;  // measured torso twist (exogenous)
};

struct InputTorques {
  double tau_R = 0.0;  // rider torso torque at the seat pivot
  double tau = 0.0;    // drivetrain torque on the ball
};

/// Interaction wrench the torso applies to the seat, expressed at the seat
/// centre. The sagittal model moves along the y-axis and pitches about it, so
/// only F_py, F_pz and tau_py can be non-zero here.
struct PHRIWrench {
  double F_px = 0.0;
  double F_py = 0.0;
  double F_pz = 0.0;
  double tau_px = 0.0;
  double tau_py = 0.0;
  double tau_pz = 0.0;
};

}  // namespace ridebot
