#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ridebot/control.hpp"
#include "ridebot/model.hpp"
#include "ridebot/trajectory.hpp"

namespace ridebot {

class SimulationBlowUp : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rider torso torque as a function of time and the current state.
using RiderPolicy = std::function<double(double t, const PlanarState& s)>;

/// tau_R = 0.
RiderPolicy passive_rider();
/// Piecewise-linear interpolation of (time, tau_R) samples, held constant
/// outside the sampled interval.
RiderPolicy tabulated_rider(std::vector<double> t, std::vector<double> tau_R);
/// Torso held to the chassis by a stiff PD on the relative lean.
RiderPolicy stiff_torso_rider(double kp = 4000.0, double kd = 200.0);

/// Classical fourth-order Runge-Kutta step with the input held constant.
/// Requires dt in (0, 0.01]; throws SimulationBlowUp on a non-finite result.
PlanarState step_rk4(const PlanarState& s, const InputTorques& u, double dt,
                     const RiderBallbotParams& p);

struct SimOptions {
  double dt = 1e-3;
  double t_end = 5.0;
  double theta_limit = 0.35;  // fall-over threshold [rad]
  double tau_max = 40.0;      // drivetrain saturation [N m]
};

enum class SimStatus { kOk, kFell, kBlowUp };

std::string to_string(SimStatus s);

struct SimResult {
  Trajectory trajectory;
  SimStatus status = SimStatus::kOk;
  std::string diagnostic;
  bool any_saturated = false;
  ControllerState final_controller;
};

/// Closed-loop forward simulation. The drivetrain torque is re-evaluated from
/// the control law at every Runge-Kutta stage; the interaction moment comes
/// from the seat wrench at the same instant. HACS-2/3 integrals advance once
/// per step (trapezoidal) and are held within a step. A fall (|theta| above
/// the limit) or a blow-up truncates the trajectory and sets the status.
SimResult simulate(const PlanarState& s0, const RiderPolicy& rider,
                   const ControlScheme& sch, const Gains& g,
                   const RiderBallbotParams& p, const SimOptions& opt,
                   const ControllerState& cs0 = {});

}  // namespace ridebot
