#include "occld/entropy.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <vector>

namespace occld {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double xlogy_ratio(double x, double num, double den) {
  // x * log(num/den) with the 0 log 0 convention.
  if (x <= 0.0) return 0.0;
  return x * (std::log(num) - std::log(den));
}

// Transportation feasibility on the support graph: can mass mu be routed
// from rows to columns using only pairs with K > 0? Edmonds-Karp on the
// bipartite network; each augmentation saturates a supply or demand edge.
struct FlowCheck {
  bool feasible = true;
  std::vector<int> rows;  // Hall violator A (sub-indices)
  std::vector<int> cols;  // support neighborhood N(A)
  double deficit = 0.0;
};

FlowCheck transport_feasible(const Eigen::MatrixXd& K,
                             const Eigen::VectorXd& mass) {
  const int s = static_cast<int>(mass.size());
  const int source = 0, sink = 2 * s + 1, nodes = 2 * s + 2;
  Eigen::MatrixXd cap = Eigen::MatrixXd::Zero(nodes, nodes);
  for (int i = 0; i < s; ++i) {
    cap(source, 1 + i) = mass[i];
    cap(1 + s + i, sink) = mass[i];
    for (int j = 0; j < s; ++j) {
      if (K(i, j) > 0.0) cap(1 + i, 1 + s + j) = 2.0;  // effectively infinite
    }
  }

  const double total = mass.sum();
  double flow = 0.0;
  std::vector<int> parent(nodes);
  while (true) {
    std::fill(parent.begin(), parent.end(), -1);
    parent[source] = source;
    std::deque<int> queue{source};
    while (!queue.empty() && parent[sink] < 0) {
      const int u = queue.front();
      queue.pop_front();
      for (int v = 0; v < nodes; ++v) {
        if (parent[v] < 0 && cap(u, v) > 1e-15) {
          parent[v] = u;
          queue.push_back(v);
        }
      }
    }
    if (parent[sink] < 0) break;
    double aug = kInf;
    for (int v = sink; v != source; v = parent[v]) {
      aug = std::min(aug, cap(parent[v], v));
    }
    for (int v = sink; v != source; v = parent[v]) {
      cap(parent[v], v) -= aug;
      cap(v, parent[v]) += aug;
    }
    flow += aug;
  }

  FlowCheck out;
  if (flow >= total - 1e-12) return out;

  out.feasible = false;
  // Min cut: rows reachable from the source in the residual graph form a
  // Hall violator.
  std::vector<char> seen(nodes, 0);
  seen[source] = 1;
  std::deque<int> queue{source};
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v = 0; v < nodes; ++v) {
      if (!seen[v] && cap(u, v) > 1e-15) {
        seen[v] = 1;
        queue.push_back(v);
      }
    }
  }
  std::vector<char> col_in(s, 0);
  for (int i = 0; i < s; ++i) {
    if (!seen[1 + i]) continue;
    out.rows.push_back(i);
    for (int j = 0; j < s; ++j) {
      if (K(i, j) > 0.0) col_in[j] = 1;
    }
  }
  double mass_rows = 0.0, mass_cols = 0.0;
  for (int i : out.rows) mass_rows += mass[i];
  for (int j = 0; j < s; ++j) {
    if (col_in[j]) {
      out.cols.push_back(j);
      mass_cols += mass[j];
    }
  }
  out.deficit = mass_rows - mass_cols;
  return out;
}

double log_sum_exp_row(const Eigen::VectorXd& a) {
  const double mx = a.maxCoeff();
  if (std::isinf(mx)) return -kInf;
  return mx + std::log((a.array() - mx).exp().sum());
}

}  // namespace

MarkovSource MarkovSource::make(ProbMeasure mu, Eigen::MatrixXd q,
                                double stationarity_tol) {
  const int n = mu.size();
  if (q.rows() != n || q.cols() != n) {
    throw ValidationError("kernel dimension mismatch");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (q(i, j) < 0.0) throw ValidationError("kernel has a negative entry");
    }
    if (std::abs(q.row(i).sum() - 1.0) > 1e-12) {
      throw ValidationError("kernel row " + std::to_string(i) +
                            " does not sum to 1");
    }
  }
  const Eigen::RowVectorXd res = mu.mu.transpose() * q - mu.mu.transpose();
  if (res.cwiseAbs().maxCoeff() > stationarity_tol) {
    throw ValidationError("marginal is not stationary for the kernel");
  }
  return MarkovSource{std::move(mu), std::move(q)};
}

double entropy_rate(const MarkovSource& source, const ChainModel& model) {
  if (model.kind != Kind::Discrete) {
    throw RouteError("entropy_rate requires a discrete model");
  }
  const int n = model.size();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double mu_i = source.mu.mu[i];
    if (mu_i <= 0.0) continue;
    for (int j = 0; j < n; ++j) {
      const double q_ij = source.q(i, j);
      if (q_ij <= 0.0) continue;
      if (model.kernel(i, j) <= 0.0) return kInf;
      acc += mu_i * xlogy_ratio(q_ij, q_ij, model.kernel(i, j));
    }
  }
  return acc;
}

ContractionResult contraction_rate(const ChainModel& model,
                                   const ProbMeasure& mu,
                                   const ContractionOptions& opts) {
  if (model.kind != Kind::Discrete) {
    throw RouteError("contraction_rate requires a discrete model");
  }
  const int n = model.size();

  ContractionResult out;
  out.rate.route = Route::Contraction;
  out.optimal_kernel = model.kernel;

  // Restrict to the support of mu: rows and columns off it carry no mass.
  std::vector<int> supp;
  for (int i = 0; i < n; ++i) {
    if (mu.mu[i] > 0.0) supp.push_back(i);
  }
  const int s = static_cast<int>(supp.size());

  Eigen::VectorXd mass(s);
  Eigen::MatrixXd K(s, s);
  for (int a = 0; a < s; ++a) {
    mass[a] = mu.mu[supp[a]];
    for (int b = 0; b < s; ++b) K(a, b) = mass[a] * model.kernel(supp[a], supp[b]);
  }

  const FlowCheck flow = transport_feasible(K, mass);
  if (!flow.feasible) {
    out.feasible = false;
    out.rate.value = kInf;
    for (int a : flow.rows) out.certificate_rows.push_back(supp[a]);
    for (int b : flow.cols) out.certificate_cols.push_back(supp[b]);
    out.certificate_deficit = flow.deficit;
    return out;
  }

  Eigen::MatrixXd logK(s, s);
  for (int a = 0; a < s; ++a) {
    for (int b = 0; b < s; ++b) {
      logK(a, b) = K(a, b) > 0.0 ? std::log(K(a, b)) : -kInf;
    }
  }
  const Eigen::VectorXd log_mass = mass.array().log();

  Eigen::VectorXd la = Eigen::VectorXd::Zero(s);
  Eigen::VectorXd lb = Eigen::VectorXd::Zero(s);

  auto pair_measure = [&]() {
    Eigen::MatrixXd nu(s, s);
    for (int a = 0; a < s; ++a) {
      for (int b = 0; b < s; ++b) {
        nu(a, b) = std::isinf(logK(a, b))
                       ? 0.0
                       : std::exp(la[a] + logK(a, b) + lb[b]);
      }
    }
    return nu;
  };

  // Feasible rounding (rows rescaled to mass exactly) and its objective.
  auto primal_value = [&](const Eigen::MatrixXd& nu_feas) {
    double v = 0.0;
    for (int a = 0; a < s; ++a) {
      for (int b = 0; b < s; ++b) {
        v += xlogy_ratio(nu_feas(a, b), nu_feas(a, b), K(a, b));
      }
    }
    return v;
  };
  auto row_rounded = [&](const Eigen::MatrixXd& nu) {
    Eigen::MatrixXd f = nu;
    for (int a = 0; a < s; ++a) {
      const double rs = f.row(a).sum();
      if (rs > 0.0) f.row(a) *= mass[a] / rs;
    }
    return f;
  };

  int iter = 0;
  double gap = kInf, col_residual = kInf;
  Eigen::VectorXd scratch(s);
  for (; iter < opts.max_iterations; ++iter) {
    // Row scaling: la <- log mass - log(K e^{lb}), damped.
    for (int a = 0; a < s; ++a) {
      for (int b = 0; b < s; ++b) scratch[b] = logK(a, b) + lb[b];
      la[a] = (1.0 - opts.damping) * la[a] +
              opts.damping * (log_mass[a] - log_sum_exp_row(scratch));
    }
    // Column scaling.
    for (int b = 0; b < s; ++b) {
      for (int a = 0; a < s; ++a) scratch[a] = logK(a, b) + la[a];
      lb[b] = (1.0 - opts.damping) * lb[b] +
              opts.damping * (log_mass[b] - log_sum_exp_row(scratch));
    }

    const Eigen::MatrixXd nu = pair_measure();
    const Eigen::MatrixXd nu_feas = row_rounded(nu);
    col_residual = (nu_feas.colwise().sum().transpose() - mass)
                       .cwiseAbs()
                       .sum();
    const double primal = primal_value(nu_feas);
    const double dual =
        mass.dot(la) + mass.dot(lb) + 1.0 - nu.sum();
    gap = primal - dual;
    if (col_residual <= opts.marginal_tolerance &&
        gap <= opts.gap_tolerance) {
      break;
    }
  }

  Eigen::MatrixXd nu_feas = row_rounded(pair_measure());

  // Entropic projected-gradient fallback for boundary-feasible programs
  // the scaling iteration cannot close out.
  if (gap > opts.gap_tolerance || col_residual > opts.marginal_tolerance) {
    double step = 1.0;
    double best = primal_value(nu_feas);
    Eigen::MatrixXd current = nu_feas;
    for (int k = 0; k < opts.fallback_iterations; ++k) {
      Eigen::MatrixXd trial = current;
      for (int a = 0; a < s; ++a) {
        for (int b = 0; b < s; ++b) {
          if (K(a, b) <= 0.0 || trial(a, b) <= 0.0) continue;
          const double g = std::log(trial(a, b)) - logK(a, b) + 1.0;
          trial(a, b) *= std::exp(-step * g);
        }
      }
      // Re-project onto the marginal constraints by a few IPF rounds.
      for (int r = 0; r < 8; ++r) {
        for (int a = 0; a < s; ++a) {
          const double rs = trial.row(a).sum();
          if (rs > 0.0) trial.row(a) *= mass[a] / rs;
        }
        for (int b = 0; b < s; ++b) {
          const double cs = trial.col(b).sum();
          if (cs > 0.0) trial.col(b) *= mass[b] / cs;
        }
      }
      trial = row_rounded(trial);
      const double v = primal_value(trial);
      if (v < best - 1e-15) {
        best = v;
        current = trial;
        step *= 1.5;
      } else {
        step *= 0.5;
        if (step < 1e-12) break;
      }
    }
    nu_feas = current;
    col_residual =
        (nu_feas.colwise().sum().transpose() - mass).cwiseAbs().sum();
  }

  out.rate.value = std::max(primal_value(nu_feas), 0.0);
  out.rate.iterations = iter;
  out.duality_gap = gap;
  out.marginal_residual = col_residual;
  out.rate.gradient_norm = col_residual;
  out.converged =
      gap <= opts.gap_tolerance && col_residual <= opts.marginal_tolerance;

  // Assemble the full-size kernel; rows off supp(mu) default to P.
  for (int a = 0; a < s; ++a) {
    for (int b = 0; b < s; ++b) {
      out.optimal_kernel(supp[a], supp[b]) = nu_feas(a, b) / mass[a];
    }
    for (int j = 0; j < n; ++j) {
      bool in_supp = false;
      for (int b = 0; b < s; ++b) {
        if (supp[b] == j) {
          in_supp = true;
          break;
        }
      }
      if (!in_supp) out.optimal_kernel(supp[a], j) = 0.0;
    }
  }
  return out;
}

KernelReport verify_optimal_kernel(const ChainModel& model,
                                   const ProbMeasure& mu,
                                   const Eigen::VectorXd& u_star,
                                   double residual_tol) {
  if (model.kind != Kind::Discrete) {
    throw RouteError("verify_optimal_kernel requires a discrete model");
  }
  if (u_star.minCoeff() <= 0.0) {
    throw ValidationError("optimizer must be strictly positive");
  }
  const int n = model.size();
  const Eigen::VectorXd pu = model.kernel * u_star;

  KernelReport rep;
  rep.q_star.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      rep.q_star(i, j) = model.kernel(i, j) * u_star[j] / pu[i];
    }
  }

  double dv = 0.0;
  for (int i = 0; i < n; ++i) {
    if (mu.mu[i] > 0.0) dv += mu.mu[i] * std::log(u_star[i] / pu[i]);
  }
  rep.dv_value = dv;

  rep.stationarity_residual =
      (mu.mu.transpose() * rep.q_star - mu.mu.transpose()).cwiseAbs().sum();
  const MarkovSource probe{mu, rep.q_star};  // bypasses stationarity check
  rep.value_residual = std::abs(entropy_rate(probe, model) - dv);

  rep.boundary = u_star.minCoeff() / u_star.maxCoeff() < 1e-8;
  rep.ok = rep.boundary || (rep.stationarity_residual <= residual_tol &&
                            rep.value_residual <= residual_tol);
  return rep;
}

}  // namespace occld
