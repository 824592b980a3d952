#include "occld/rate.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "occld/linalg.hpp"

namespace occld {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log sum_j exp(a_j) over the finite entries of a, stabilized by the max.
double log_sum_exp(const std::vector<double>& a) {
  double mx = -kInf;
  for (double x : a) mx = std::max(mx, x);
  if (std::isinf(mx)) return -kInf;
  double s = 0.0;
  for (double x : a) {
    if (!std::isinf(x)) s += std::exp(x - mx);
  }
  return mx + std::log(s);
}

RateResult from_ascent(const AscentResult& a, Route route) {
  RateResult r;
  r.route = route;
  r.value = a.diverged ? kInf : std::max(a.value, 0.0);
  r.optimizer = a.w.array().exp();
  r.iterations = a.iterations;
  r.gradient_norm = a.grad_norm;
  return r;
}

// sup over u > 0 of sum_i mu_i log(u_i / (Ku)_i) for a row-stochastic K,
// as a concave problem in w = log u.
RateResult dv_rate_kernel(const Eigen::MatrixXd& K, const Eigen::VectorXd& mu,
                          const AscentOptions& opts, Route route) {
  const int n = static_cast<int>(K.rows());

  // Sparsity pattern and logs per row with positive mass.
  struct Row {
    int i;
    double mu_i;
    std::vector<int> idx;
    std::vector<double> log_k;
  };
  std::vector<Row> rows;
  for (int i = 0; i < n; ++i) {
    if (mu[i] <= 0.0) continue;
    Row r;
    r.i = i;
    r.mu_i = mu[i];
    for (int j = 0; j < n; ++j) {
      if (K(i, j) > 0.0) {
        r.idx.push_back(j);
        r.log_k.push_back(std::log(K(i, j)));
      }
    }
    rows.push_back(std::move(r));
  }

  auto objective = [&](const Eigen::VectorXd& w, Eigen::VectorXd* grad) {
    double value = 0.0;
    if (grad) grad->setZero();
    std::vector<double> terms;
    for (const Row& r : rows) {
      terms.resize(r.idx.size());
      for (size_t k = 0; k < r.idx.size(); ++k) {
        terms[k] = r.log_k[k] + w[r.idx[k]];
      }
      const double z = log_sum_exp(terms);
      value += r.mu_i * (w[r.i] - z);
      if (grad) {
        (*grad)[r.i] += r.mu_i;
        for (size_t k = 0; k < r.idx.size(); ++k) {
          (*grad)[r.idx[k]] -= r.mu_i * std::exp(terms[k] - z);
        }
      }
    }
    return value;
  };

  return from_ascent(
      maximize_concave(objective, Eigen::VectorXd::Zero(n), opts), route);
}

}  // namespace

std::string route_name(Route r) {
  switch (r) {
    case Route::VariationalDiscrete:
      return "variational-discrete";
    case Route::VariationalContinuous:
      return "variational-continuous";
    case Route::Spectral:
      return "spectral";
    case Route::Contraction:
      return "contraction";
    case Route::RateH:
      return "rate-h";
  }
  return "unknown";
}

RateResult dv_rate_discrete(const ChainModel& model, const ProbMeasure& mu,
                            const AscentOptions& opts) {
  if (model.kind != Kind::Discrete) {
    throw RouteError("dv_rate_discrete requires a discrete model");
  }
  return dv_rate_kernel(model.kernel, mu.mu, opts,
                        Route::VariationalDiscrete);
}

RateResult dv_rate_continuous(const ChainModel& model, const ProbMeasure& mu,
                              const AscentOptions& opts) {
  if (model.kind != Kind::Continuous) {
    throw RouteError("dv_rate_continuous requires a continuous model");
  }
  const Eigen::MatrixXd& Q = model.kernel;
  const Eigen::VectorXd& m = mu.mu;
  const int n = model.size();

  // psi(w) = -sum_i mu_i sum_j Q_ij exp(w_j - w_i); off-diagonal
  // coefficients are <= 0 after the sign flip, so psi is concave.
  auto objective = [&](const Eigen::VectorXd& w, Eigen::VectorXd* grad) {
    double value = 0.0;
    if (grad) grad->setZero();
    for (int i = 0; i < n; ++i) {
      if (m[i] <= 0.0) continue;
      value -= m[i] * Q(i, i);
      for (int j = 0; j < n; ++j) {
        if (j == i || Q(i, j) == 0.0) continue;
        const double e = std::exp(w[j] - w[i]);
        value -= m[i] * Q(i, j) * e;
        if (grad) {
          (*grad)[j] -= m[i] * Q(i, j) * e;
          (*grad)[i] += m[i] * Q(i, j) * e;
        }
      }
    }
    return value;
  };

  return from_ascent(
      maximize_concave(objective, Eigen::VectorXd::Zero(n), opts),
      Route::VariationalContinuous);
}

RateResult rate_I(const ChainModel& model, const ProbMeasure& mu,
                  const AscentOptions& opts) {
  if (!absolutely_continuous(mu, model.m)) {
    RateResult r;
    r.value = kInf;
    r.route = model.kind == Kind::Discrete ? Route::VariationalDiscrete
                                           : Route::VariationalContinuous;
    return r;
  }
  return model.kind == Kind::Discrete ? dv_rate_discrete(model, mu, opts)
                                      : dv_rate_continuous(model, mu, opts);
}

RateResult rate_h(const ChainModel& model, const ProbMeasure& mu, double h,
                  const AscentOptions& opts) {
  if (h <= 0.0) throw ValidationError("rate_h requires h > 0");
  const Eigen::MatrixXd p_h = semigroup(model, h);
  RateResult r = dv_rate_kernel(p_h, mu.mu, opts, Route::RateH);
  return r;
}

LimitCheckTable limit_check(const ChainModel& model, const ProbMeasure& mu,
                            std::span<const double> h_grid,
                            const LimitCheckOptions& opts) {
  if (model.kind != Kind::Continuous) {
    throw RouteError("limit_check requires a continuous model");
  }
  for (size_t k = 0; k + 1 < h_grid.size(); ++k) {
    if (!(h_grid[k] > h_grid[k + 1]) || h_grid[k + 1] <= 0.0) {
      throw ValidationError("h grid must be strictly decreasing and positive");
    }
  }

  LimitCheckTable table;
  table.rate = dv_rate_continuous(model, mu, opts.ascent).value;
  for (double h : h_grid) {
    const double ih = rate_h(model, mu, h, opts.ascent).value;
    LimitCheckRow row;
    row.h = h;
    row.rate_h_over_h = ih / h;
    row.error = std::abs(row.rate_h_over_h - table.rate);
    table.rows.push_back(row);
  }

  table.monotone = true;
  for (size_t k = 0; k + 1 < table.rows.size(); ++k) {
    if (table.rows[k + 1].error > table.rows[k].error + opts.monotone_slack) {
      table.monotone = false;
    }
  }
  const double final_tol =
      std::max(opts.final_rel_tol * table.rate, opts.final_abs_tol);
  table.final_ok = table.rows.empty() ? false
                                      : table.rows.back().error <= final_tol;
  table.pass = table.monotone && table.final_ok;
  return table;
}

double dirichlet_form(const ChainModel& model, const Eigen::VectorXd& f,
                      const Eigen::VectorXd& g) {
  if (model.kind != Kind::Continuous) {
    throw RouteError("dirichlet_form requires a continuous model");
  }
  const Eigen::VectorXd minus_Qf = -(model.kernel * f);
  return (model.m.array() * g.array() * minus_Qf.array()).sum();
}

RateResult spectral_rate(const ChainModel& model, const ProbMeasure& mu) {
  const auto rev = check_reversibility(model);
  if (!rev.reversible) {
    std::ostringstream os;
    os << "spectral rate requires detailed balance; worst pair ("
       << model.states[rev.worst_i] << ", " << model.states[rev.worst_j]
       << ") violates by " << rev.max_violation;
    throw RouteError(os.str());
  }

  RateResult r;
  r.route = Route::Spectral;
  r.informational = model.kind == Kind::Discrete;
  if (!absolutely_continuous(mu, model.m)) {
    r.value = kInf;
    return r;
  }

  const int n = model.size();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (model.m[i] > 0.0) f[i] = std::sqrt(mu.mu[i] / model.m[i]);
  }

  double value;
  if (model.kind == Kind::Continuous) {
    value = dirichlet_form(model, f, f);
  } else {
    const Eigen::VectorXd diff = f - model.kernel * f;
    value = (model.m.array() * f.array() * diff.array()).sum();
  }
  r.value = std::max(value, 0.0);
  return r;
}

Lemma57Table lemma57_check(const ChainModel& model, const ProbMeasure& mu,
                           std::span<const double> h_grid) {
  if (model.kind != Kind::Continuous) {
    throw RouteError("lemma57_check requires a continuous model");
  }
  if (!check_reversibility(model).reversible) {
    throw RouteError("lemma57_check requires a reversible model");
  }
  if (!absolutely_continuous(mu, model.m)) {
    throw ValidationError("lemma57_check requires mu << m");
  }

  const int n = model.size();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (model.m[i] > 0.0) f[i] = std::sqrt(mu.mu[i] / model.m[i]);
  }

  Lemma57Table table;
  table.rate = dv_rate_continuous(model, mu).value;
  for (double h : h_grid) {
    const Eigen::VectorXd phf = semigroup(model, h) * f;
    Lemma57Row row;
    row.h = h;
    row.lhs = (model.m.array() * f.array() * (f - phf).array()).sum();
    row.bound = h * table.rate + 1e-9;
    row.lhs_over_h = row.lhs / h;
    row.pass = row.lhs <= row.bound;
    table.rows.push_back(row);
  }

  // (1/h) <f, (I - p_h) f>_m increases to the rate as h drops: spectral
  // monotonicity of (1 - e^{-h l})/h.
  table.monotone = true;
  for (size_t k = 0; k + 1 < table.rows.size(); ++k) {
    if (table.rows[k].h <= table.rows[k + 1].h) {
      throw ValidationError("h grid must be strictly decreasing");
    }
    if (table.rows[k + 1].lhs_over_h < table.rows[k].lhs_over_h - 1e-9) {
      table.monotone = false;
    }
  }
  table.pass = table.monotone;
  for (const auto& row : table.rows) table.pass = table.pass && row.pass;
  return table;
}

}  // namespace occld
