#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <ridebot/dynamics.hpp>
#include <ridebot/linearize.hpp>
#include <ridebot/simulate.hpp>

#include "fixtures_symbolic.hpp"
#include "generators.hpp"

namespace ridebot {
namespace {

using testing::Gen;
using testing::relative_error;

PlanarState from_array(const double (&a)[6]) {
  return {a[0], a[1], a[2], a[3], a[4], a[5]};
}

TEST(Params, DefaultsAreValid) {
  const RiderBallbotParams p = default_rider();
  EXPECT_NO_THROW(p.validate());
  EXPECT_DOUBLE_EQ(p.r_s, 2.0 / 17.6);
  EXPECT_NEAR(p.r_s * 17.6, 2.0, 1e-15);
  EXPECT_NEAR(p.m_r, 0.678 * 60.0, 1e-12);
  EXPECT_EQ(p.b_phi, 0.0);
}

TEST(Params, ValidateNamesTheOffendingField) {
  RiderBallbotParams p = default_rider();
  p.m_c = -1.0;
  try {
    p.validate();
    FAIL() << "expected invalid_argument";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("m_c"), std::string::npos) << e.what();
  }
  p = default_rider();
  p.b_phi = -0.1;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = default_rider();
  p.r_s = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(MassMatrix, MatchesSymbolicDerivation) {
  const RiderBallbotParams p = default_rider();
  const Eigen::Vector3d q(fixtures::kMassMatrixQ[0], fixtures::kMassMatrixQ[1],
                          fixtures::kMassMatrixQ[2]);
  Eigen::Matrix3d expected;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) expected(i, j) = fixtures::kMassMatrix[i][j];
  }
  const Eigen::Matrix3d M = mass_matrix(q, p);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      EXPECT_LT(std::abs(M(i, j) - expected(i, j)) / std::abs(expected(i, j)), 1e-10)
          << "entry " << i << "," << j;
    }
  }
}

TEST(MassMatrix, SymmetricPositiveDefiniteOnRandomConfigurations) {
  const RiderBallbotParams p = default_rider();
  Gen gen(11);
  for (int trial = 0; trial < 10000; ++trial) {
    const Eigen::Vector3d q = gen.configuration();
    const Eigen::Matrix3d M = mass_matrix(q, p);
    ASSERT_TRUE(M == M.transpose()) << "q = " << q.transpose();
    const Eigen::Vector3d eig = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(M).eigenvalues();
    ASSERT_GT(eig.minCoeff(), 0.0) << "q = " << q.transpose();
  }
}

TEST(EomForward, MatchesSymbolicDerivation) {
  for (const auto& c : fixtures::kAccelerationCases) {
    RiderBallbotParams p = default_rider();
    p.b_phi = c.b_phi;
    const Accelerations qdd = eom_forward(from_array(c.state), {c.tau_R, c.tau}, p);
    const Eigen::Vector3d expected(c.qdd[0], c.qdd[1], c.qdd[2]);
    EXPECT_LT(relative_error(qdd, expected), 1e-10) << qdd.transpose();
  }
}

TEST(EomForward, UprightRestIsAnEquilibrium) {
  const Accelerations qdd = eom_forward({}, {}, default_rider());
  EXPECT_EQ(qdd, Eigen::Vector3d::Zero());
}

TEST(EomForward, ForwardTiltFallsForward) {
  PlanarState s;
  s.theta = 0.05;
  EXPECT_GT(eom_forward(s, {}, default_rider())[1], 0.0);
}

TEST(EomForward, SatisfiesTheManipulatorEquation) {
  const RiderBallbotParams p = default_rider();
  Gen gen(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const PlanarState s = gen.state();
    const InputTorques u = gen.input();
    const Eigen::Vector3d q(s.zeta, s.theta, s.phi);
    const Eigen::Vector3d qd(s.zeta_dot, s.theta_dot, s.phi_dot);
    const Eigen::Vector3d lhs = mass_matrix(q, p) * eom_forward(s, u, p) +
                                coriolis_matrix(q, qd, p) * qd + gravity_vector(q, p);
    const Eigen::Vector3d Q(u.tau_R, -u.tau_R - u.tau, u.tau - p.b_phi * s.phi_dot);
    ASSERT_LT((lhs - Q).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, lhs.cwiseAbs().maxCoeff()));
  }
}

TEST(Coriolis, MassMatrixRateMinusTwoCIsSkew) {
  const RiderBallbotParams p = default_rider();
  Gen gen(13);
  for (int trial = 0; trial < 10000; ++trial) {
    const Eigen::Vector3d q = gen.configuration();
    const Eigen::Vector3d qd = gen.rates();
    const Eigen::Matrix3d N = mass_matrix_rate(q, qd, p) - 2.0 * coriolis_matrix(q, qd, p);
    ASSERT_LT(std::abs(qd.dot(N * qd)), 1e-9);
    ASSERT_LT((N + N.transpose()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Coriolis, MassMatrixRateMatchesFiniteDifference) {
  const RiderBallbotParams p = default_rider();
  Gen gen(14);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Vector3d q = gen.configuration();
    const Eigen::Vector3d qd = gen.rates();
    const double h = 1e-6;
    const Eigen::Matrix3d fd = (mass_matrix(q + h * qd, p) - mass_matrix(q - h * qd, p)) / (2 * h);
    ASSERT_LT((mass_matrix_rate(q, qd, p) - fd).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Energy, ZeroAtUprightRest) { EXPECT_EQ(total_energy({}, default_rider()), 0.0); }

TEST(Energy, PureSpinIsHalfTheBallInertiaEntry) {
  const RiderBallbotParams p = default_rider();
  PlanarState s;
  s.phi_dot = 1.0;
  const double m22 = mass_matrix(Eigen::Vector3d::Zero(), p)(2, 2);
  EXPECT_NEAR(total_energy(s, p), 0.5 * m22, 1e-14);
  EXPECT_NEAR(m22, p.I_s + p.total_mass() * p.r_s * p.r_s, 1e-14);
}

TEST(Energy, KineticPartEqualsQuadraticFormOfMassMatrix) {
  const RiderBallbotParams p = default_rider();
  Gen gen(15);
  for (int trial = 0; trial < 200; ++trial) {
    PlanarState s = gen.state();
    PlanarState still = s;
    still.zeta_dot = still.theta_dot = still.phi_dot = 0.0;
    const Eigen::Vector3d q(s.zeta, s.theta, s.phi);
    const Eigen::Vector3d qd(s.zeta_dot, s.theta_dot, s.phi_dot);
    const double kinetic = 0.5 * qd.dot(mass_matrix(q, p) * qd);
    ASSERT_NEAR(total_energy(s, p) - total_energy(still, p), kinetic, 1e-10 * (1.0 + kinetic));
  }
}

double kinetic_energy(const PlanarState& s, const RiderBallbotParams& p) {
  PlanarState still = s;
  still.zeta_dot = still.theta_dot = still.phi_dot = 0.0;
  return total_energy(s, p) - total_energy(still, p);
}

// Worst absolute energy error and peak kinetic energy over an unforced run.
std::pair<double, double> unforced_drift(PlanarState s, double dt, double horizon,
                                         const RiderBallbotParams& p) {
  const double e0 = total_energy(s, p);
  double worst = 0.0;
  double peak_kinetic = kinetic_energy(s, p);
  const int steps = static_cast<int>(std::lround(horizon / dt));
  for (int k = 0; k < steps; ++k) {
    s = step_rk4(s, {}, dt, p);
    worst = std::max(worst, std::abs(total_energy(s, p) - e0));
    peak_kinetic = std::max(peak_kinetic, kinetic_energy(s, p));
  }
  return {worst, peak_kinetic};
}

TEST(Energy, UnforcedFrictionlessDriftIsBelowTolerance) {
  const RiderBallbotParams p = default_rider();
  Gen gen(16);
  for (int trial = 0; trial < 5; ++trial) {
    const PlanarState s{gen.uniform(-0.3, 0.3), gen.uniform(-0.3, 0.3), 0.0,
                        gen.uniform(-1.0, 1.0), gen.uniform(-1.0, 1.0), gen.uniform(-10.0, 10.0)};
    const auto [worst, scale] = unforced_drift(s, 1e-3, 5.0, p);
    EXPECT_LT(worst / scale, 1e-6) << "trial " << trial;
  }
}

TEST(Energy, DriftShrinksAtFourthOrder) {
  const RiderBallbotParams p = default_rider();
  const PlanarState s{0.2, -0.25, 0.0, 0.5, -0.8, 6.0};
  const double coarse = unforced_drift(s, 1e-3, 5.0, p).first;
  const double fine = unforced_drift(s, 5e-4, 5.0, p).first;
  EXPECT_GT(coarse / fine, 10.0);
  EXPECT_LT(coarse / fine, 22.0);
}

TEST(Energy, FrictionOnlyDissipates) {
  RiderBallbotParams p = default_rider();
  p.b_phi = 0.5;
  PlanarState s{0.1, -0.05, 0.0, 0.3, -0.2, 8.0};
  double previous = total_energy(s, p);
  for (int k = 0; k < 5000; ++k) {
    s = step_rk4(s, {}, 1e-3, p);
    const double e = total_energy(s, p);
    ASSERT_LE(e, previous + 1e-9) << "step " << k;
    previous = e;
  }
}

TEST(Linearize, UprightHasStateSpaceStructureAndIsUnstable) {
  const LinearModel lin = linearize(default_rider(), {}, {});
  EXPECT_TRUE((lin.A.topLeftCorner<3, 3>().isZero(0.0)));
  EXPECT_TRUE((lin.A.topRightCorner<3, 3>() == Eigen::Matrix3d::Identity()));
  EXPECT_TRUE((lin.B.topRows<3>().isZero(0.0)));
  const Eigen::VectorXcd eig = lin.A.eigenvalues();
  EXPECT_GT(eig.real().maxCoeff(), 0.0);
}

TEST(Linearize, MatchesCentralFiniteDifferences) {
  const RiderBallbotParams p = default_rider();
  Gen gen(17);
  // Upright rest and steady rolling are equilibria with zero input.
  for (double phi_dot : {0.0, 12.3}) {
    PlanarState s0;
    s0.phi = gen.uniform(-5.0, 5.0);
    s0.phi_dot = phi_dot;
    const LinearModel lin = linearize(p, s0, {});
    const double h = 1e-6;
    Eigen::Matrix<double, 6, 6> A_fd;
    Eigen::Matrix<double, 6, 2> B_fd;
    const PlanarState::Vector x0 = s0.to_vector();
    for (int j = 0; j < 6; ++j) {
      PlanarState::Vector xp = x0, xm = x0;
      xp[j] += h;
      xm[j] -= h;
      A_fd.col(j) = (state_derivative(xp, {}, p) - state_derivative(xm, {}, p)) / (2 * h);
    }
    B_fd.col(0) = (state_derivative(x0, {h, 0.0}, p) - state_derivative(x0, {-h, 0.0}, p)) / (2 * h);
    B_fd.col(1) = (state_derivative(x0, {0.0, h}, p) - state_derivative(x0, {0.0, -h}, p)) / (2 * h);
    EXPECT_LT(relative_error(lin.A, A_fd), 1e-6);
    EXPECT_LT(relative_error(lin.B, B_fd), 1e-6);
  }
}

TEST(Linearize, RejectsPointsThatAreNotEquilibria) {
  PlanarState s;
  s.theta = 0.1;
  EXPECT_THROW(linearize(default_rider(), s, {}), NotAnEquilibrium);
}

TEST(Yaw, RigidRotorExamples) {
  RiderBallbotParams p = default_rider();
  EXPECT_EQ(yaw_eom({}, 0.0, p), 0.0);
  EXPECT_DOUBLE_EQ(yaw_eom({}, p.I_z, p), 1.0);
  p.I_z = 4.0;
  EXPECT_DOUBLE_EQ(yaw_eom({0.3, -0.2, 0.1}, 2.0, p), 0.5);
}

}  // namespace
}  // namespace ridebot
