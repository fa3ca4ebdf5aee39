#include "ridebot/riccati.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace ridebot {

namespace {

constexpr int kMaxNewtonIterations = 50;

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& X) {
  return 0.5 * (X + X.transpose());
}

Eigen::MatrixXd hamiltonian_seed(const Eigen::MatrixXd& A,
                                 const Eigen::MatrixXd& G,
                                 const Eigen::MatrixXd& Q) {
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd H(2 * n, 2 * n);
  H << A, -G, -Q, -A.transpose();

  Eigen::ComplexEigenSolver<Eigen::MatrixXd> eig(H);
  if (eig.info() != Eigen::Success) {
    throw RiccatiError("eigendecomposition of the Hamiltonian failed");
  }
  std::vector<Eigen::Index> stable;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    const double re = eig.eigenvalues()[i].real();
    if (std::abs(re) < 1e-12 * (1.0 + std::abs(eig.eigenvalues()[i]))) {
      throw RiccatiError(
          "Hamiltonian has eigenvalues on the imaginary axis; (A, B) is not "
          "stabilizable or (Q, A) is not detectable");
    }
    if (re < 0.0) stable.push_back(i);
  }
  if (static_cast<Eigen::Index>(stable.size()) != n) {
    throw RiccatiError("Hamiltonian stable subspace has the wrong dimension");
  }
  Eigen::MatrixXcd U(2 * n, n);
  for (Eigen::Index j = 0; j < n; ++j) U.col(j) = eig.eigenvectors().col(stable[j]);

  const Eigen::MatrixXcd U1 = U.topRows(n);
  const Eigen::MatrixXcd U2 = U.bottomRows(n);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(U1);
  if (!lu.isInvertible()) {
    throw RiccatiError("system is not stabilizable: stable subspace is not a graph");
  }
  const Eigen::MatrixXcd X = U2 * lu.inverse();
  return symmetrize(X.real());
}

}  // namespace

double spectral_abscissa(const Eigen::MatrixXd& M) {
  Eigen::EigenSolver<Eigen::MatrixXd> eig(M, false);
  return eig.eigenvalues().real().maxCoeff();
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A,
                               const Eigen::MatrixXd& C) {
  const Eigen::Index n = A.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  // vec(A'X + XA) = (I (x) A' + A' (x) I) vec(X), column-major vec
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      L.block(i * n, j * n, n, n) += I(i, j) * A.transpose();
      L.block(i * n, j * n, n, n) += A(j, i) * I;
    }
  }
  const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(C.data(), n * n);
  const Eigen::VectorXd x = L.fullPivLu().solve(-c);
  return symmetrize(Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n));
}

double care_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                     const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd G = B * R.llt().solve(B.transpose());
  return (A.transpose() * P + P * A - P * G * P + Q).norm();
}

CareSolution solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n ||
      R.rows() != m || R.cols() != m) {
    throw std::invalid_argument("solve_care: inconsistent matrix dimensions");
  }
  Eigen::LLT<Eigen::MatrixXd> R_llt(R);
  if (R_llt.info() != Eigen::Success) {
    throw std::invalid_argument("solve_care: R must be positive definite");
  }
  const Eigen::MatrixXd G = B * R_llt.solve(B.transpose());

  CareSolution sol;
  sol.P = hamiltonian_seed(A, G, Q);
  sol.residual = care_residual(A, B, Q, R, sol.P);

  for (int it = 0; it < kMaxNewtonIterations; ++it) {
    const Eigen::MatrixXd K = R_llt.solve(B.transpose() * sol.P);
    const Eigen::MatrixXd Acl = A - B * K;
    if (spectral_abscissa(Acl) >= 0.0) {
      throw RiccatiError("Newton-Kleinman iterate lost closed-loop stability");
    }
    const Eigen::MatrixXd next =
        solve_lyapunov(Acl, Q + K.transpose() * R * K);
    const double next_residual = care_residual(A, B, Q, R, next);
    if (!(next_residual < sol.residual)) break;
    sol.P = next;
    sol.residual = next_residual;
    ++sol.newton_iterations;
  }

  sol.K = R_llt.solve(B.transpose() * sol.P);
  const double scale = std::max({1.0, Q.norm(), sol.P.norm()});
  if (!(sol.residual <= 1e-9 * scale)) {
    throw RiccatiError("Riccati iteration did not converge, residual " +
                       std::to_string(sol.residual));
  }
  if (spectral_abscissa(A - B * sol.K) >= 0.0) {
    throw RiccatiError("Riccati solution is not stabilizing");
  }
  return sol;
}

}  // namespace ridebot
