#pragma once

#include <stdexcept>
#include <utility>

#include <Eigen/Core>

#include "ridebot/model.hpp"
#include "ridebot/trajectory.hpp"

namespace ridebot {

/// Rider capability figures that normalise the braking effort.
struct BrakingWeights {
  double zeta_ROM = 0.52;         // torso range of motion [rad]
  double phi_max = 1.0 / (2.0 / 17.6);  // desired braking distance as ball angle [rad]
  double zeta_dot_max = 2.0;      // [rad/s]
  double tau_R_max = 60.0;        // [N m]

  void validate() const;
};

using StateWeights = Eigen::Matrix<double, 6, 6>;
using InputWeights = Eigen::Matrix2d;

/// Q = diag(1/zeta_ROM^2, 0, 1/phi_max^2, 1/zeta_dot_max^2, 0, 0),
/// R = diag(1/tau_R_max^2, 0). Throws std::invalid_argument on a
/// non-positive input.
std::pair<StateWeights, InputWeights> braking_weights(double zeta_ROM,
                                                      double phi_max,
                                                      double zeta_dot_max,
                                                      double tau_R_max);
std::pair<StateWeights, InputWeights> braking_weights(const BrakingWeights& w);

/// Trapezoidal quadrature of s^T Q s + u^T R u over knots [first, last],
/// where s is the deviation of the state from the state at `first` (so phi
/// enters as distance travelled) and u is the absolute input.
double braking_effort(const Trajectory& traj, const StateWeights& Q,
                      const InputWeights& R, std::size_t first, std::size_t last);
double braking_effort(const Trajectory& traj, const StateWeights& Q,
                      const InputWeights& R);

struct BrakingMetrics {
  double J = 0.0;
  double torso_ROM_deg = 0.0;
  double max_tau_p = 0.0;
  double L = 0.0;  // [m]
  double T = 0.0;  // [s]
};

class NoStopDetected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StopCriterion {
  double onset_time = 0.0;  // brake onset; snapped to the first knot at or after it
  double v_stop = 0.02;     // [m/s]
  double hold = 0.2;        // [s]; a stop that lasts to the end of the record counts
};

/// Knot index of the first stop that persists for `hold` seconds (or to the
/// end of the record) at or after `from`. Throws NoStopDetected.
std::size_t detect_stop(const Trajectory& traj, const RiderBallbotParams& p,
                        std::size_t from, const StopCriterion& c = {});

/// Braking metrics over [onset, stop]. Throws NoStopDetected.
BrakingMetrics compute_metrics(const Trajectory& traj, const BrakingWeights& w,
                               const RiderBallbotParams& p,
                               const StopCriterion& c = {});

}  // namespace ridebot
