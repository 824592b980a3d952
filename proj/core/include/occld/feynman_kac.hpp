#pragma once

#include <Eigen/Dense>

#include "occld/chain.hpp"

namespace occld {

// A smoothed test function v = (1/t0) int_0^t0 p_s (p_eta u) ds together
// with its exact generator image Lhat v = (p_t0 u~ - u~)/t0.
struct D1Element {
  Eigen::VectorXd v;
  Eigen::VectorXd Lhat_v;
};

D1Element construct_D1_element(const ChainModel& model,
                               const Eigen::VectorXd& u, double t0,
                               double eta = 0.0);

// Potential built from a smoothed element: V = Lhat v / (v + epsilon).
// Satisfies ||V||_inf <= 2 ||u~||_inf / (t0 * epsilon).
struct TiltSpec {
  Eigen::VectorXd v;
  Eigen::VectorXd Lhat_v;
  double epsilon = 0.0;
  Eigen::VectorXd V;
  double t0 = 0.0;
  double eta = 0.0;

  Eigen::VectorXd v_eps() const {
    return v.array() + epsilon;
  }
};

TiltSpec make_tilt(const ChainModel& model, const Eigen::VectorXd& u,
                   double t0, double eta, double epsilon);

// Feynman-Kac semigroup exp(t (Q - diag V)).
Eigen::MatrixXd tilted_semigroup(const ChainModel& model,
                                 const Eigen::VectorXd& V, double t);

// ||v_eps - p~_t v_eps||_inf; the identity is exact, so the residual is
// rounding only.
double fk_identity_check(const ChainModel& model, const TiltSpec& tilt,
                         double t);

// ||(m . v_eps)^T p~_t - (m . v_eps)^T||_1 on reversible models: v_eps dm
// is an invariant measure of the tilted semigroup. Throws RouteError on a
// non-reversible model.
double tilted_invariance_check(const ChainModel& model, const TiltSpec& tilt,
                               double t);

// Largest singular value of D_{sqrt m} p~_t D_{sqrt m}^{-1} restricted to
// supp m; at most 1 for potentials built from smoothed elements.
double tilted_contraction_check(const ChainModel& model,
                                const Eigen::VectorXd& V, double t);
double tilted_contraction_check(const ChainModel& model, const TiltSpec& tilt,
                                double t);

}  // namespace occld
