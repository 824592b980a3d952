#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "occld/ascent.hpp"
#include "occld/chain.hpp"

namespace occld {

enum class Route {
  VariationalDiscrete,
  VariationalContinuous,
  Spectral,
  Contraction,
  RateH,
};

std::string route_name(Route r);

struct RateResult {
  double value = 0.0;  // nonnegative, may be +infinity
  Route route = Route::VariationalDiscrete;
  Eigen::VectorXd optimizer;  // maximizing u or v (empty for spectral)
  int iterations = 0;
  double gradient_norm = 0.0;
  // Discrete-time Dirichlet values are reported but never asserted against
  // the variational rate; there is no discrete analog of the spectral
  // identity to rely on.
  bool informational = false;

  bool is_infinite() const { return std::isinf(value); }
};

// sup over u > 0 of sum_i mu_i log(u_i / (Pu)_i), maximized in w = log u.
RateResult dv_rate_discrete(const ChainModel& model, const ProbMeasure& mu,
                            const AscentOptions& opts = {});

// sup over v > 0 of sum_i mu_i (-(Qv)_i / v_i), maximized in w = log v.
RateResult dv_rate_continuous(const ChainModel& model, const ProbMeasure& mu,
                              const AscentOptions& opts = {});

// +infinity when mu is not absolutely continuous w.r.t. m; otherwise the
// kind-appropriate variational rate.
RateResult rate_I(const ChainModel& model, const ProbMeasure& mu,
                  const AscentOptions& opts = {});

// The h-step rate: the discrete variational form with P replaced by p_h.
RateResult rate_h(const ChainModel& model, const ProbMeasure& mu, double h,
                  const AscentOptions& opts = {});

struct LimitCheckRow {
  double h = 0.0;
  double rate_h_over_h = 0.0;
  double error = 0.0;  // |rate_h/h - rate|
};

struct LimitCheckOptions {
  double monotone_slack = 1e-9;
  double final_rel_tol = 0.15;
  double final_abs_tol = 1e-8;
  AscentOptions ascent;
};

struct LimitCheckTable {
  std::vector<LimitCheckRow> rows;
  double rate = 0.0;  // continuous-time variational value
  bool monotone = false;
  bool final_ok = false;
  bool pass = false;
};

// Audits rate_h(mu)/h -> rate(mu) along a strictly decreasing h grid:
// errors must not increase and the last one must be under tolerance.
LimitCheckTable limit_check(const ChainModel& model, const ProbMeasure& mu,
                            std::span<const double> h_grid,
                            const LimitCheckOptions& opts = {});

// E(f, g) = sum_i m_i g_i (-(Qf))_i. Meaningful as a symmetric form only
// on reversible models; computed regardless.
double dirichlet_form(const ChainModel& model, const Eigen::VectorXd& f,
                      const Eigen::VectorXd& g);

// The Dirichlet-form value E(f, f) with f = sqrt(dmu/dm) on {m > 0}. For
// continuous reversible models this equals the variational rate; for
// reversible discrete models the analogous value <(I-P)f, f>_m is returned
// with the informational flag set. Throws RouteError when detailed balance
// fails; returns +infinity when mu is not absolutely continuous w.r.t. m.
RateResult spectral_rate(const ChainModel& model, const ProbMeasure& mu);

struct Lemma57Row {
  double h = 0.0;
  double lhs = 0.0;         // sum_i m_i f_i (f - p_h f)_i
  double bound = 0.0;       // h * rate + 1e-9
  double lhs_over_h = 0.0;  // converges upward to the rate as h drops
  bool pass = false;
};

struct Lemma57Table {
  std::vector<Lemma57Row> rows;
  double rate = 0.0;
  bool monotone = false;  // lhs/h nondecreasing as h decreases
  bool pass = false;
};

// Checks sum m f (f - p_h f) <= h * I(mu) + 1e-9 for each h in the grid
// (strictly decreasing), plus the upward convergence of lhs/h.
Lemma57Table lemma57_check(const ChainModel& model, const ProbMeasure& mu,
                           std::span<const double> h_grid);

}  // namespace occld
