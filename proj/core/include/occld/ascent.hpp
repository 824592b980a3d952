#pragma once

#include <functional>

#include <Eigen/Dense>

namespace occld {

struct AscentOptions {
  int max_iterations = 10000;
  double grad_tolerance = 1e-10;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  // A run is declared divergent (value +infinity) when the objective sits
  // above objective_cap while the gradient norm stays above stall_grad_floor
  // for stall_window consecutive accepted steps.
  double objective_cap = 1e6;
  double stall_grad_floor = 1e-6;
  int stall_window = 50;
};

struct AscentResult {
  Eigen::VectorXd w;
  double value = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  bool diverged = false;   // objective ran past the cap without flattening
  bool converged = false;  // gradient norm under tolerance
};

// Gradient ascent with Armijo backtracking for a smooth concave objective
// that is invariant under adding a constant to w (the gauge w[0] = 0 is
// re-imposed after every step). The objective callback fills the gradient
// when the pointer is non-null.
using ConcaveObjective =
    std::function<double(const Eigen::VectorXd& w, Eigen::VectorXd* grad)>;

AscentResult maximize_concave(const ConcaveObjective& objective,
                              Eigen::VectorXd w0, const AscentOptions& opts);

}  // namespace occld
