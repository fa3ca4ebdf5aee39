#pragma once

#include <stdexcept>

#include <Eigen/Core>

namespace ridebot {

class RiccatiError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CareSolution {
  Eigen::MatrixXd P;  // stabilizing solution
  Eigen::MatrixXd K;  // R^-1 B^T P
  double residual = 0.0;  // ||A'P + PA - PBR^-1B'P + Q||_F
  int newton_iterations = 0;
};

/// Continuous algebraic Riccati equation
///   A'P + PA - P B R^-1 B' P + Q = 0.
/// Seeds with the stable invariant subspace of the Hamiltonian matrix, then
/// polishes with Newton-Kleinman iterations. Throws RiccatiError when (A, B)
/// is not stabilizable or the iteration fails to converge.
CareSolution solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

double care_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                     const Eigen::MatrixXd& P);

/// Solves A'X + XA + C = 0 for X (small dense systems only).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A,
                               const Eigen::MatrixXd& C);

/// Largest real part among the eigenvalues of M.
double spectral_abscissa(const Eigen::MatrixXd& M);

}  // namespace ridebot
