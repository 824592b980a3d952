#include "occld/chain.hpp"

#include <cmath>
#include <sstream>

#include "occld/linalg.hpp"

namespace occld {

namespace {

constexpr double kRowTol = 1e-12;
constexpr double kBalanceTol = 1e-10;

std::string row_msg(const char* what, int row, double value) {
  std::ostringstream os;
  os << what << " at row " << row << " (value " << value << ")";
  return os.str();
}

}  // namespace

int ChainModel::state_index(const std::string& label) const {
  for (int i = 0; i < size(); ++i) {
    if (states[i] == label) return i;
  }
  return -1;
}

ProbMeasure ProbMeasure::from_vector(Eigen::VectorXd mu, double tol) {
  for (int i = 0; i < mu.size(); ++i) {
    if (!(mu[i] >= 0.0)) {
      throw ValidationError(row_msg("negative probability", i, mu[i]));
    }
  }
  const double total = mu.sum();
  if (std::abs(total - 1.0) > tol) {
    std::ostringstream os;
    os << "probabilities sum to " << total << ", expected 1 within " << tol;
    throw ValidationError(os.str());
  }
  return ProbMeasure{std::move(mu)};
}

ProbMeasure ProbMeasure::delta(int state, int n) {
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);
  mu[state] = 1.0;
  return ProbMeasure{std::move(mu)};
}

ProbMeasure ProbMeasure::uniform(int n) {
  return ProbMeasure{Eigen::VectorXd::Constant(n, 1.0 / n)};
}

bool absolutely_continuous(const ProbMeasure& mu, const Eigen::VectorXd& m) {
  for (int i = 0; i < mu.size(); ++i) {
    if (mu.mu[i] > 0.0 && m[i] <= 0.0) return false;
  }
  return true;
}

std::vector<int> StateSet::members() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (contains(i)) out.push_back(i);
  }
  return out;
}

StateSet StateSet::empty_set(int n) {
  return StateSet{Eigen::VectorXd::Zero(n)};
}

StateSet StateSet::from_indices(const std::vector<int>& idx, int n) {
  Eigen::VectorXd ind = Eigen::VectorXd::Zero(n);
  for (int i : idx) {
    if (i < 0 || i >= n) throw ValidationError("state index out of range");
    ind[i] = 1.0;
  }
  return StateSet{std::move(ind)};
}

StateSet StateSet::from_indicator(Eigen::VectorXd ind) {
  for (int i = 0; i < ind.size(); ++i) {
    if (ind[i] != 0.0 && ind[i] != 1.0) {
      throw ValidationError(row_msg("indicator entry not in {0,1}", i, ind[i]));
    }
  }
  return StateSet{std::move(ind)};
}

StateSet set_union(const StateSet& a, const StateSet& b) {
  return StateSet{a.indicator.cwiseMax(b.indicator)};
}

bool is_subset(const StateSet& a, const StateSet& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a.contains(i) && !b.contains(i)) return false;
  }
  return true;
}

ChainModel build_model(Kind kind, const Eigen::MatrixXd& matrix,
                       const Eigen::VectorXd& m,
                       std::vector<std::string> labels) {
  const int n = static_cast<int>(matrix.rows());
  if (matrix.cols() != n) throw ValidationError("matrix is not square");
  if (m.size() != n) throw ValidationError("reference measure length mismatch");

  if (labels.empty()) {
    labels.reserve(n);
    for (int i = 0; i < n; ++i) labels.push_back("s" + std::to_string(i));
  }
  if (static_cast<int>(labels.size()) != n) {
    throw ValidationError("state label count mismatch");
  }

  for (int i = 0; i < n; ++i) {
    const double row_sum = matrix.row(i).sum();
    if (kind == Kind::Discrete) {
      for (int j = 0; j < n; ++j) {
        if (matrix(i, j) < 0.0) {
          throw ValidationError(row_msg("negative transition probability", i,
                                        matrix(i, j)));
        }
      }
      if (std::abs(row_sum - 1.0) > kRowTol) {
        throw ValidationError(row_msg("row of P does not sum to 1", i, row_sum));
      }
    } else {
      for (int j = 0; j < n; ++j) {
        if (j != i && matrix(i, j) < 0.0) {
          throw ValidationError(
              row_msg("negative off-diagonal rate", i, matrix(i, j)));
        }
      }
      if (std::abs(row_sum) > kRowTol) {
        throw ValidationError(
            row_msg("row of Q does not sum to 0", i, row_sum));
      }
    }
  }

  bool any_positive = false;
  for (int i = 0; i < n; ++i) {
    if (m[i] < 0.0) {
      throw ValidationError(row_msg("negative reference mass", i, m[i]));
    }
    if (m[i] > 0.0) any_positive = true;
  }
  if (!any_positive) {
    throw ValidationError("reference measure has zero total mass");
  }

  return ChainModel{kind, std::move(labels), matrix, m};
}

Eigen::MatrixXd semigroup(const ChainModel& model, double t) {
  const int n = model.size();
  if (t < 0.0) throw ValidationError("negative time");

  Eigen::MatrixXd p;
  if (model.kind == Kind::Discrete) {
    const double rounded = std::round(t);
    if (std::abs(t - rounded) > 1e-9) {
      throw ValidationError("discrete models admit integer times only");
    }
    // Binary powering of P.
    long long steps = static_cast<long long>(rounded);
    p = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd base = model.kernel;
    while (steps > 0) {
      if (steps & 1) p = p * base;
      base = base * base;
      steps >>= 1;
    }
  } else {
    const auto rev = check_reversibility(model);
    if (rev.reversible && model.m_positive()) {
      p = linalg::expm_weighted_symmetric(model.kernel, model.m, t);
    } else {
      p = linalg::expm(t * model.kernel);
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (p(i, j) < 0.0 && p(i, j) >= -1e-12) p(i, j) = 0.0;
    }
  }
  return p;
}

Eigen::MatrixXd resolvent(const ChainModel& model) {
  const int n = model.size();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  if (model.kind == Kind::Continuous) {
    // (I - Q) is invertible: strictly diagonally dominant off the
    // conservative structure, spectrum of Q in the closed left half plane.
    return (id - model.kernel).partialPivLu().solve(id);
  }
  // sum_{k>=1} 2^{-k} P^k = (P/2)(I - P/2)^{-1}; spectral radius of P/2 is 1/2.
  const Eigen::MatrixXd half = 0.5 * model.kernel;
  return half * (id - half).partialPivLu().solve(id);
}

ReversibilityReport check_reversibility(const ChainModel& model) {
  ReversibilityReport rep;
  const int n = model.size();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double v = std::abs(model.m[i] * model.kernel(i, j) -
                                model.m[j] * model.kernel(j, i));
      if (v > rep.max_violation) {
        rep.max_violation = v;
        rep.worst_i = i;
        rep.worst_j = j;
      }
    }
  }
  rep.reversible = rep.max_violation <= kBalanceTol;
  return rep;
}

bool check_invariance(const ChainModel& model) {
  const Eigen::RowVectorXd lhs = model.m.transpose() * model.kernel;
  if (model.kind == Kind::Discrete) {
    return (lhs - model.m.transpose()).cwiseAbs().maxCoeff() <= kBalanceTol;
  }
  return lhs.cwiseAbs().maxCoeff() <= kBalanceTol;
}

IrreducibilityReport check_condition_114(const ChainModel& model,
                                         double positivity_cutoff) {
  IrreducibilityReport rep;
  const Eigen::MatrixXd R = resolvent(model);
  const int n = model.size();
  for (int i = 0; i < n; ++i) {
    if (model.m[i] <= 0.0) continue;
    for (int j = 0; j < n; ++j) {
      if (model.m[j] <= 0.0) continue;
      if (R(i, j) <= positivity_cutoff) rep.violations.emplace_back(i, j);
    }
  }
  rep.holds = rep.violations.empty();
  return rep;
}

}  // namespace occld
