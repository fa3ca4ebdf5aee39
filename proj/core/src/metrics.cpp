#include "ridebot/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ridebot {

void BrakingWeights::validate() const {
  if (!(zeta_ROM > 0.0) || !(phi_max > 0.0) || !(zeta_dot_max > 0.0) ||
      !(tau_R_max > 0.0)) {
    throw std::invalid_argument("braking weights must all be strictly positive");
  }
}

std::pair<StateWeights, InputWeights> braking_weights(double zeta_ROM,
                                                      double phi_max,
                                                      double zeta_dot_max,
                                                      double tau_R_max) {
  BrakingWeights{zeta_ROM, phi_max, zeta_dot_max, tau_R_max}.validate();
  StateWeights Q = StateWeights::Zero();
  Q(0, 0) = 1.0 / (zeta_ROM * zeta_ROM);
  Q(2, 2) = 1.0 / (phi_max * phi_max);
  Q(3, 3) = 1.0 / (zeta_dot_max * zeta_dot_max);
  InputWeights R = InputWeights::Zero();
  R(0, 0) = 1.0 / (tau_R_max * tau_R_max);
  return {Q, R};
}

std::pair<StateWeights, InputWeights> braking_weights(const BrakingWeights& w) {
  return braking_weights(w.zeta_ROM, w.phi_max, w.zeta_dot_max, w.tau_R_max);
}

double braking_effort(const Trajectory& traj, const StateWeights& Q,
                      const InputWeights& R, std::size_t first, std::size_t last) {
  if (traj.size() == 0) throw std::invalid_argument("braking_effort: empty trajectory");
  if (first > last || last >= traj.size()) {
    throw std::out_of_range("braking_effort: knot range out of bounds");
  }
  const PlanarState::Vector ref = traj.states[first].to_vector();
  auto integrand = [&](std::size_t k) {
    const PlanarState::Vector s = traj.states[k].to_vector() - ref;
    const Eigen::Vector2d u(traj.inputs[k].tau_R, traj.inputs[k].tau);
    return s.dot(Q * s) + u.dot(R * u);
  };
  double J = 0.0;
  double prev = integrand(first);
  for (std::size_t k = first + 1; k <= last; ++k) {
    const double cur = integrand(k);
    J += 0.5 * (traj.t[k] - traj.t[k - 1]) * (prev + cur);
    prev = cur;
  }
  return J;
}

double braking_effort(const Trajectory& traj, const StateWeights& Q,
                      const InputWeights& R) {
  if (traj.size() == 0) throw std::invalid_argument("braking_effort: empty trajectory");
  return braking_effort(traj, Q, R, 0, traj.size() - 1);
}

std::size_t detect_stop(const Trajectory& traj, const RiderBallbotParams& p,
                        std::size_t from, const StopCriterion& c) {
  const std::size_t n = traj.size();
  auto stopped = [&](std::size_t k) {
    return std::abs(traj.states[k].phi_dot) * p.r_s < c.v_stop;
  };
  std::size_t k = from;
  while (k < n) {
    if (!stopped(k)) {
      ++k;
      continue;
    }
    std::size_t j = k;
    while (j < n && stopped(j) && traj.t[j] - traj.t[k] < c.hold) ++j;
    if (j == n || stopped(j)) return k;  // held to the end or for `hold`
    k = j + 1;
  }
  throw NoStopDetected("speed never stayed below " + format_double(c.v_stop) +
                       " m/s for " + format_double(c.hold) + " s");
}

BrakingMetrics compute_metrics(const Trajectory& traj, const BrakingWeights& w,
                               const RiderBallbotParams& p, const StopCriterion& c) {
  traj.validate();
  const auto onset_it = std::lower_bound(traj.t.begin(), traj.t.end(), c.onset_time);
  if (onset_it == traj.t.end()) throw NoStopDetected("brake onset after end of record");
  const auto onset = static_cast<std::size_t>(onset_it - traj.t.begin());
  const std::size_t stop = detect_stop(traj, p, onset, c);

  const auto [Q, R] = braking_weights(w);
  BrakingMetrics m;
  m.J = braking_effort(traj, Q, R, onset, stop);
  double zmin = traj.states[onset].zeta, zmax = zmin, tp = 0.0;
  for (std::size_t k = onset; k <= stop; ++k) {
    zmin = std::min(zmin, traj.states[k].zeta);
    zmax = std::max(zmax, traj.states[k].zeta);
    tp = std::max(tp, std::abs(traj.tau_p[k]));
  }
  m.torso_ROM_deg = (zmax - zmin) * 180.0 / std::numbers::pi;
  m.max_tau_p = tp;
  m.L = p.r_s * (traj.states[stop].phi - traj.states[onset].phi);
  m.T = traj.t[stop] - traj.t[onset];
  return m;
}

}  // namespace ridebot
