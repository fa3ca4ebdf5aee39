#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include <ridebot/control.hpp>
#include <ridebot/dynamics.hpp>
#include <ridebot/equilibrium.hpp>
#include <ridebot/metrics.hpp>
#include <ridebot/phri.hpp>
#include <ridebot/simulate.hpp>

#include "generators.hpp"

namespace ridebot {
namespace {

using testing::Gen;

RiderPolicy constant_rider(double tau_R) {
  return [tau_R](double, const PlanarState&) { return tau_R; };
}

PlanarState integrate(PlanarState s, const InputTorques& u, double dt, double horizon,
                      const RiderBallbotParams& p) {
  const int steps = static_cast<int>(std::lround(horizon / dt));
  for (int k = 0; k < steps; ++k) s = step_rk4(s, u, dt, p);
  return s;
}

class SimTest : public ::testing::Test {
 protected:
  RiderBallbotParams p = default_rider();
  Gains g = synthesize_gains(p);
};

TEST_F(SimTest, Rk4LeavesRestUnchanged) {
  PlanarState s;
  for (int k = 0; k < 1000; ++k) s = step_rk4(s, {}, 1e-3, p);
  EXPECT_EQ(s, PlanarState{});
}

TEST_F(SimTest, Rk4IsFourthOrder) {
  const PlanarState s0{0.1, -0.05, 0.0, 0.4, -0.3, 5.0};
  const InputTorques u{3.0, -2.0};
  const PlanarState::Vector ref = integrate(s0, u, 1e-3 / 16, 0.4, p).to_vector();
  const double e1 = (integrate(s0, u, 8e-3, 0.4, p).to_vector() - ref).norm();
  const double e2 = (integrate(s0, u, 4e-3, 0.4, p).to_vector() - ref).norm();
  EXPECT_GT(e1 / e2, 12.0);
  EXPECT_LT(e1 / e2, 20.0);
}

TEST_F(SimTest, Rk4RejectsOutOfRangeSteps) {
  EXPECT_THROW(step_rk4({}, {}, 0.02, p), std::invalid_argument);
  EXPECT_THROW(step_rk4({}, {}, 0.0, p), std::invalid_argument);
}

TEST_F(SimTest, EquilibriumAtRestIsHeld) {
  SimOptions opt;
  opt.t_end = 5.0;
  const SimResult r = simulate({}, passive_rider(), ControlScheme::baseline(), g, p, opt);
  ASSERT_EQ(r.status, SimStatus::kOk);
  double worst = 0.0;
  for (const PlanarState& s : r.trajectory.states) {
    worst = std::max(worst, s.to_vector().cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-9);
}

TEST_F(SimTest, CruiseEquilibriumIsHeld) {
  for (const ControlScheme& sch : {ControlScheme::hics1(0.5), ControlScheme::hics2(0.8),
                                   ControlScheme::hacs1(0.6)}) {
    const Equilibrium eq = find_equilibrium(sch, g, p, 1.4);
    SimOptions opt;
    opt.t_end = 3.0;
    const SimResult r = simulate(eq.state, constant_rider(eq.tau_R_hold), sch, g, p, opt);
    ASSERT_EQ(r.status, SimStatus::kOk) << sch.name();
    double worst = 0.0;
    for (std::size_t k = 0; k < r.trajectory.size(); ++k) {
      PlanarState expected = eq.state;
      expected.phi += eq.state.phi_dot * r.trajectory.t[k];
      const PlanarState::Vector d = r.trajectory.states[k].to_vector() - expected.to_vector();
      worst = std::max(worst, d.cwiseAbs().maxCoeff());
    }
    EXPECT_LT(worst, 1e-9) << sch.name();
  }
}

TEST_F(SimTest, IdenticalInputsGiveIdenticalTrajectories) {
  const ControlScheme sch = ControlScheme::hacs3(0.4, 0.3);
  const Equilibrium eq = find_equilibrium(ControlScheme::hacs1(0.4), g, p, 1.0);
  SimOptions opt;
  opt.t_end = 2.0;
  const SimResult a = simulate(eq.state, stiff_torso_rider(), sch, g, p, opt);
  const SimResult b = simulate(eq.state, stiff_torso_rider(), sch, g, p, opt);
  ASSERT_EQ(a.trajectory.size(), b.trajectory.size());
  EXPECT_EQ(a.trajectory.t, b.trajectory.t);
  EXPECT_EQ(a.trajectory.states, b.trajectory.states);
  EXPECT_EQ(a.trajectory.tau_p, b.trajectory.tau_p);
  EXPECT_EQ(a.trajectory.phi_dot_c, b.trajectory.phi_dot_c);
}

TEST_F(SimTest, LogsInteractionMomentAndCommandSpeed) {
  const ControlScheme sch = ControlScheme::hacs1(0.5);
  const Equilibrium eq = find_equilibrium(sch, g, p, 1.4);
  SimOptions opt;
  opt.t_end = 1.0;
  const SimResult r = simulate(eq.state, stiff_torso_rider(), sch, g, p, opt);
  ASSERT_EQ(r.status, SimStatus::kOk);
  const Trajectory& t = r.trajectory;
  for (std::size_t k = 0; k < t.size(); ++k) {
    ASSERT_EQ(t.tau_p[k], seat_pitch_moment(t.inputs[k].tau_R));
    ASSERT_NEAR(t.phi_dot_c[k], 0.5 * t.tau_p[k], 1e-12);
  }
}

TEST_F(SimTest, FallIsDetectedAndTruncates) {
  PlanarState s0;
  s0.theta = 0.2;
  s0.theta_dot = 2.0;
  SimOptions opt;
  opt.tau_max = 1.0;
  opt.t_end = 5.0;
  const SimResult r = simulate(s0, passive_rider(), ControlScheme::baseline(), g, p, opt);
  EXPECT_EQ(r.status, SimStatus::kFell);
  EXPECT_EQ(to_string(r.status), "fell");
  EXPECT_GT(std::abs(r.trajectory.states.back().theta), opt.theta_limit);
  EXPECT_LT(r.trajectory.t.back(), opt.t_end);
  EXPECT_TRUE(r.any_saturated);
}

TEST_F(SimTest, HalvingTheStepChangesEffortLittle) {
  const ControlScheme sch = ControlScheme::hacs1(0.5);
  const Equilibrium eq = find_equilibrium(sch, g, p, 1.4);
  const BrakingWeights w;
  SimOptions opt;
  opt.t_end = 8.0;
  const SimResult coarse = simulate(eq.state, stiff_torso_rider(), sch, g, p, opt);
  opt.dt = 5e-4;
  const SimResult fine = simulate(eq.state, stiff_torso_rider(), sch, g, p, opt);
  ASSERT_EQ(coarse.status, SimStatus::kOk);
  ASSERT_EQ(fine.status, SimStatus::kOk);
  const double J1 = compute_metrics(coarse.trajectory, w, p).J;
  const double J2 = compute_metrics(fine.trajectory, w, p).J;
  EXPECT_LT(std::abs(J1 - J2) / J2, 0.005);
}

TEST_F(SimTest, TabulatedRiderInterpolatesAndHolds) {
  const RiderPolicy r = tabulated_rider({0.0, 1.0, 2.0}, {0.0, 10.0, -10.0});
  EXPECT_EQ(r(-1.0, {}), 0.0);
  EXPECT_DOUBLE_EQ(r(0.25, {}), 2.5);
  EXPECT_DOUBLE_EQ(r(1.5, {}), 0.0);
  EXPECT_EQ(r(3.0, {}), -10.0);
  EXPECT_THROW(tabulated_rider({1.0, 0.0}, {0.0, 0.0}), std::invalid_argument);
}

TEST_F(SimTest, EquilibriumAtZeroSpeedIsRest) {
  for (const ControlScheme& sch :
       {ControlScheme::baseline(), ControlScheme::hics1(0.3), ControlScheme::hics2(0.7),
        ControlScheme::hacs1(0.4), ControlScheme::hacs2(0.4), ControlScheme::hacs3(0.2, 0.5)}) {
    const Equilibrium eq = find_equilibrium(sch, g, p, 0.0);
    EXPECT_LT(eq.state.to_vector().cwiseAbs().maxCoeff(), 1e-12) << sch.name();
    EXPECT_LT(std::abs(eq.tau_R_hold), 1e-12) << sch.name();
  }
}

TEST_F(SimTest, Hacs1CruiseBalancesTiltAgainstCommandShortfall) {
  const double v = 1.4;
  for (double nu_P : {0.3, 0.6, 1.0}) {
    const Equilibrium eq = find_equilibrium(ControlScheme::hacs1(nu_P), g, p, v);
    // frictionless steady rolling needs zero drive torque
    EXPECT_NEAR(eq.state.phi_dot, v / p.r_s, 1e-12);
    EXPECT_NEAR(eq.tau, 0.0, 1e-9);
    EXPECT_NEAR(eq.phi_dot_c, nu_P * eq.tau_p, 1e-9);
    EXPECT_NEAR(g.k1 * eq.state.theta, g.k3 * (eq.phi_dot_c - eq.state.phi_dot), 1e-8);
    EXPECT_LT(eq.phi_dot_c, eq.state.phi_dot);
    EXPECT_LT(eq.state.theta, 0.0);
  }
}

TEST_F(SimTest, EquilibriumResidualCheckedByDirectEvaluation) {
  for (const ControlScheme& sch :
       {ControlScheme::hics1(0.5), ControlScheme::hics2(0.5), ControlScheme::hacs1(0.5)}) {
    const Equilibrium eq = find_equilibrium(sch, g, p, 1.4);
    const double tau = stateless_control_torque(eq.state.to_vector(), eq.tau_R_hold, sch, g);
    EXPECT_NEAR(tau, eq.tau, 1e-12);
    EXPECT_LT(eom_forward(eq.state, {eq.tau_R_hold, tau}, p).norm(), 1e-10) << sch.name();
    EXPECT_NEAR(eq.state.zeta_dot, 0.0, 0.0);
    EXPECT_NEAR(eq.state.theta_dot, 0.0, 0.0);
  }
}

TEST_F(SimTest, EquilibriumFailsWhenHoldTorqueExceedsLimit) {
  EquilibriumLimits limits;
  limits.tau_R_max = 1e-3;
  EXPECT_THROW(find_equilibrium(ControlScheme::hacs1(0.5), g, p, 1.4, limits), EquilibriumError);
  EXPECT_THROW(find_equilibrium(ControlScheme::hics1(0.5), g, p, -1.0), std::invalid_argument);
}

}  // namespace
}  // namespace ridebot
