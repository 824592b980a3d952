#pragma once

#include <Eigen/Dense>

namespace occld::linalg {

// Matrix exponential, scaling-and-squaring with the 13th-order Pade
// approximant (Eigen's MatrixFunctions implementation).
Eigen::MatrixXd expm(const Eigen::MatrixXd& A);

// exp(t K) for K similar to a symmetric matrix under D = diag(sqrt(w)),
// w strictly positive: computed by eigendecomposition of D K D^{-1}.
Eigen::MatrixXd expm_weighted_symmetric(const Eigen::MatrixXd& K,
                                        const Eigen::VectorXd& w, double t);

// G(t) = \int_0^t exp(sA) ds, exact via the block exponential of
// [[A, 0], [I, 0]]; valid for singular A.
Eigen::MatrixXd integrate_expm(const Eigen::MatrixXd& A, double t);

// Same integral for the weighted-symmetric case, spectrally:
// eigenvalue 0 integrates to t, eigenvalue l to (exp(t l) - 1)/l.
Eigen::MatrixXd integrate_expm_weighted_symmetric(const Eigen::MatrixXd& K,
                                                  const Eigen::VectorXd& w,
                                                  double t);

// Largest singular value of D_{sqrt(w)} M D_{sqrt(w)}^{-1}, w > 0.
double weighted_operator_norm(const Eigen::MatrixXd& M,
                              const Eigen::VectorXd& w);

}  // namespace occld::linalg
