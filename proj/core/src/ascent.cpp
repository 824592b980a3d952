#include "occld/ascent.hpp"

#include <cmath>

namespace occld {

AscentResult maximize_concave(const ConcaveObjective& objective,
                              Eigen::VectorXd w0, const AscentOptions& opts) {
  AscentResult res;
  Eigen::VectorXd w = std::move(w0);
  w.array() -= w[0];

  Eigen::VectorXd grad(w.size());
  double value = objective(w, &grad);
  double step = 1.0;
  int stall = 0;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const double gn = grad.norm();
    res.iterations = iter;
    res.grad_norm = gn;
    if (gn <= opts.grad_tolerance) {
      res.converged = true;
      break;
    }

    // Armijo backtracking; the initial step grows on easy accepts so the
    // iterate can run down flat boundary directions quickly.
    double alpha = step;
    Eigen::VectorXd w_try;
    double v_try = value;
    bool accepted = false;
    while (alpha > 1e-18) {
      w_try = w + alpha * grad;
      w_try.array() -= w_try[0];
      v_try = objective(w_try, nullptr);
      if (std::isfinite(v_try) &&
          v_try >= value + opts.armijo_c * alpha * gn * gn) {
        accepted = true;
        break;
      }
      alpha *= opts.backtrack;
    }
    if (!accepted) break;  // no ascent step representable; treat as done

    step = alpha * 2.0;
    w = std::move(w_try);
    value = objective(w, &grad);

    if (value > opts.objective_cap && grad.norm() > opts.stall_grad_floor) {
      if (++stall >= opts.stall_window) {
        res.diverged = true;
        res.iterations = iter + 1;
        res.grad_norm = grad.norm();
        break;
      }
    } else {
      stall = 0;
    }
  }

  res.w = std::move(w);
  res.value = value;
  if (!res.converged && !res.diverged) res.grad_norm = grad.norm();
  return res;
}

}  // namespace occld
