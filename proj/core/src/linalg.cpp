#include "occld/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace occld::linalg {

Eigen::MatrixXd expm(const Eigen::MatrixXd& A) {
  return A.exp();
}

Eigen::MatrixXd expm_weighted_symmetric(const Eigen::MatrixXd& K,
                                        const Eigen::VectorXd& w, double t) {
  const Eigen::VectorXd d = w.array().sqrt();
  const Eigen::MatrixXd S =
      d.asDiagonal() * K * d.cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      0.5 * (S + S.transpose()));
  const Eigen::VectorXd e = (t * eig.eigenvalues().array()).exp();
  const Eigen::MatrixXd core =
      eig.eigenvectors() * e.asDiagonal() * eig.eigenvectors().transpose();
  return d.cwiseInverse().asDiagonal() * core * d.asDiagonal();
}

Eigen::MatrixXd integrate_expm(const Eigen::MatrixXd& A, double t) {
  const int n = static_cast<int>(A.rows());
  // [y; w]' = [[A, 0], [I, 0]] [y; w] with y = exp(sA) u, w = int y; the
  // lower-left block of the big exponential is the integral operator.
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  big.topLeftCorner(n, n) = A;
  big.bottomLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd e = expm(t * big);
  return e.bottomLeftCorner(n, n);
}

Eigen::MatrixXd integrate_expm_weighted_symmetric(const Eigen::MatrixXd& K,
                                                  const Eigen::VectorXd& w,
                                                  double t) {
  const Eigen::VectorXd d = w.array().sqrt();
  const Eigen::MatrixXd S =
      d.asDiagonal() * K * d.cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      0.5 * (S + S.transpose()));
  Eigen::VectorXd g(eig.eigenvalues().size());
  for (int i = 0; i < g.size(); ++i) {
    const double lambda = eig.eigenvalues()[i];
    // int_0^t exp(s lambda) ds, with the lambda -> 0 limit equal to t.
    g[i] = std::abs(lambda) * t < 1e-12 ? t : std::expm1(t * lambda) / lambda;
  }
  const Eigen::MatrixXd core =
      eig.eigenvectors() * g.asDiagonal() * eig.eigenvectors().transpose();
  return d.cwiseInverse().asDiagonal() * core * d.asDiagonal();
}

double weighted_operator_norm(const Eigen::MatrixXd& M,
                              const Eigen::VectorXd& w) {
  const Eigen::VectorXd d = w.array().sqrt();
  const Eigen::MatrixXd S =
      d.asDiagonal() * M * d.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(S);
  return svd.singularValues()[0];
}

}  // namespace occld::linalg
