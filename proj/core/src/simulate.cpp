#include "ridebot/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "ridebot/dynamics.hpp"
#include "ridebot/phri.hpp"

namespace ridebot {

RiderPolicy passive_rider() {
  return [](double, const PlanarState&) { return 0.0; };
}

RiderPolicy tabulated_rider(std::vector<double> t, std::vector<double> tau_R) {
  if (t.empty() || t.size() != tau_R.size()) {
    throw std::invalid_argument("tabulated_rider: need matching, non-empty samples");
  }
  if (!std::is_sorted(t.begin(), t.end())) {
    throw std::invalid_argument("tabulated_rider: sample times must be sorted");
  }
  return [t = std::move(t), u = std::move(tau_R)](double time, const PlanarState&) {
    if (time <= t.front()) return u.front();
    if (time >= t.back()) return u.back();
    const auto it = std::upper_bound(t.begin(), t.end(), time);
    const std::size_t k = static_cast<std::size_t>(it - t.begin()) - 1;
    const double w = (time - t[k]) / (t[k + 1] - t[k]);
    return (1.0 - w) * u[k] + w * u[k + 1];
  };
}

RiderPolicy stiff_torso_rider(double kp, double kd) {
  return [kp, kd](double, const PlanarState& s) {
    return -kp * (s.zeta - s.theta) - kd * (s.zeta_dot - s.theta_dot);
  };
}

PlanarState step_rk4(const PlanarState& s, const InputTorques& u, double dt,
                     const RiderBallbotParams& p) {
  if (!(dt > 0.0 && dt <= 0.01)) {
    throw std::invalid_argument("step_rk4: dt must lie in (0, 0.01]");
  }
  const PlanarState::Vector x = s.to_vector();
  const PlanarState::Vector k1 = state_derivative(x, u, p);
  const PlanarState::Vector k2 = state_derivative(x + 0.5 * dt * k1, u, p);
  const PlanarState::Vector k3 = state_derivative(x + 0.5 * dt * k2, u, p);
  const PlanarState::Vector k4 = state_derivative(x + dt * k3, u, p);
  const PlanarState::Vector next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) throw SimulationBlowUp("non-finite state after RK4 step");
  return PlanarState::from_vector(next);
}

std::string to_string(SimStatus s) {
  switch (s) {
    case SimStatus::kOk: return "ok";
    case SimStatus::kFell: return "fell";
    case SimStatus::kBlowUp: return "blowup";
  }
  return "unknown";
}

namespace {

struct LawOutput {
  double tau_R = 0.0;
  double tau = 0.0;
  double tau_p = 0.0;
  double phi_dot_c = 0.0;
  bool saturated = false;
};

// Control torque at an arbitrary instant; integral schemes use the held
// integral value.
LawOutput evaluate_law(double t, const PlanarState& s, const RiderPolicy& rider,
                       const ControlScheme& sch, const Gains& g,
                       double held_integral, double tau_max) {
  LawOutput out;
  out.tau_R = rider(t, s);
  out.tau_p = seat_pitch_moment(out.tau_R);
  double raw = 0.0;
  if (sch.has_integral()) {
    out.phi_dot_c = hacs_command_speed(out.tau_p, held_integral, sch);
    raw = -g.k1 * s.theta - g.k2 * s.theta_dot + g.k3 * (out.phi_dot_c - s.phi_dot);
  } else {
    raw = stateless_control_torque<double>(s.to_vector(), out.tau_R, sch, g,
                                           &out.phi_dot_c);
  }
  out.tau = saturate(raw, tau_max, &out.saturated);
  return out;
}

}  // namespace

SimResult simulate(const PlanarState& s0, const RiderPolicy& rider,
                   const ControlScheme& sch, const Gains& g,
                   const RiderBallbotParams& p, const SimOptions& opt,
                   const ControllerState& cs0) {
  if (!(opt.t_end > 0.0)) throw std::invalid_argument("simulate: t_end must be positive");
  if (!(opt.dt > 0.0 && opt.dt <= 0.01)) {
    throw std::invalid_argument("simulate: dt must lie in (0, 0.01]");
  }
  sch.validate();

  const auto steps = static_cast<std::size_t>(std::llround(opt.t_end / opt.dt));
  SimResult result;
  result.trajectory.reserve(steps + 1);
  ControllerState cs = cs0;
  PlanarState s = s0;

  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * opt.dt;

    // Knot log. For integral laws this is also where the integral advances.
    LawOutput knot;
    if (sch.has_integral()) {
      knot.tau_R = rider(t, s);
      knot.tau_p = seat_pitch_moment(knot.tau_R);
      const HacsOutput h = hacs_torque(s, knot.tau_p, cs, opt.dt, g, sch);
      cs = h.state;
      knot.phi_dot_c = h.phi_dot_c;
      knot.tau = saturate(h.tau_r, opt.tau_max, &knot.saturated);
    } else {
      knot = evaluate_law(t, s, rider, sch, g, 0.0, opt.tau_max);
    }
    result.any_saturated = result.any_saturated || knot.saturated;
    result.trajectory.push_back(t, s, {knot.tau_R, knot.tau}, knot.tau_p,
                                knot.phi_dot_c, knot.saturated);

    if (std::abs(s.theta) > opt.theta_limit) {
      result.status = SimStatus::kFell;
      result.diagnostic = "chassis tilt " + format_double(s.theta) +
                          " rad exceeded limit at t = " + format_double(t) + " s";
      break;
    }
    if (k == steps) break;

    const double held = cs.tau_p_integral;
    auto deriv = [&](double tt, const PlanarState::Vector& x) {
      const PlanarState xs = PlanarState::from_vector(x);
      const LawOutput law = evaluate_law(tt, xs, rider, sch, g, held, opt.tau_max);
      return state_derivative(x, {law.tau_R, law.tau}, p);
    };
    const PlanarState::Vector x = s.to_vector();
    const double h = opt.dt;
    PlanarState::Vector next;
    try {
      const PlanarState::Vector k1 = deriv(t, x);
      const PlanarState::Vector k2 = deriv(t + 0.5 * h, x + 0.5 * h * k1);
      const PlanarState::Vector k3 = deriv(t + 0.5 * h, x + 0.5 * h * k2);
      const PlanarState::Vector k4 = deriv(t + h, x + h * k3);
      next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } catch (const SingularMassMatrix& e) {
      next.setConstant(std::nan(""));
    }
    if (!next.allFinite()) {
      result.status = SimStatus::kBlowUp;
      result.diagnostic = "non-finite state at t = " + format_double(t + h) + " s";
      break;
    }
    s = PlanarState::from_vector(next);
  }
  result.final_controller = cs;
  return result;
}

}  // namespace ridebot
