#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "occld/chain.hpp"
#include "occld/rate.hpp"

namespace occld {

// A stationary Markov source: marginal mu and a row-stochastic kernel q
// with mu^T q = mu^T.
struct MarkovSource {
  ProbMeasure mu;
  Eigen::MatrixXd q;

  static MarkovSource make(ProbMeasure mu, Eigen::MatrixXd q,
                           double stationarity_tol = 1e-10);
};

// Per-step relative entropy rate sum_ij mu_i q_ij log(q_ij / P_ij), with
// 0 log(0/x) = 0; +infinity when the source uses a P-forbidden transition
// from a state with positive marginal.
double entropy_rate(const MarkovSource& source, const ChainModel& model);

struct ContractionOptions {
  int max_iterations = 200000;
  double gap_tolerance = 1e-9;
  double marginal_tolerance = 1e-11;
  double damping = 1.0;  // 1 = undamped multiplicative update
  int fallback_iterations = 2000;
};

struct ContractionResult {
  RateResult rate;               // route = Contraction
  Eigen::MatrixXd optimal_kernel;  // q*, rows off supp(mu) set to P rows
  double duality_gap = 0.0;
  double marginal_residual = 0.0;  // l1 distance of column sums from mu
  bool feasible = true;
  bool converged = false;
  // Infeasibility certificate: a set of rows A whose mass cannot be routed
  // through the support of mu_i P_ij, its support neighborhood N(A), and
  // the deficit mu(A) - mu(N(A)) > 0.
  std::vector<int> certificate_rows;
  std::vector<int> certificate_cols;
  double certificate_deficit = 0.0;
};

// min over pair measures nu >= 0 with both marginals equal to mu of
// sum nu_ij log(nu_ij / (mu_i P_ij)), solved as an I-projection by
// multiplicative marginal scaling with a duality-gap stopping rule and a
// projected-gradient fallback.
ContractionResult contraction_rate(const ChainModel& model,
                                   const ProbMeasure& mu,
                                   const ContractionOptions& opts = {});

struct KernelReport {
  Eigen::MatrixXd q_star;           // P_ij u*_j / (Pu*)_i
  double stationarity_residual = 0.0;  // ||mu^T q* - mu^T||_1
  double value_residual = 0.0;         // |entropy_rate(mu, q*) - dv value|
  double dv_value = 0.0;
  bool boundary = false;  // optimizer ran to the positive-orthant boundary
  bool ok = false;        // residuals under tol (skipped when boundary)
};

// Builds the tilted kernel from a dv_rate_discrete optimizer and reports
// how close it is to a stationary source attaining the same value. At an
// interior optimum both residuals vanish; at a boundary optimum the
// stationarity assertion is skipped and flagged.
KernelReport verify_optimal_kernel(const ChainModel& model,
                                   const ProbMeasure& mu,
                                   const Eigen::VectorXd& u_star,
                                   double residual_tol = 1e-5);

}  // namespace occld
