#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "occld/errors.hpp"

namespace occld {

enum class Kind { Discrete, Continuous };

inline const char* kind_name(Kind k) {
  return k == Kind::Discrete ? "discrete" : "continuous";
}

// Finite-state Markov model: a row-stochastic matrix P (discrete time) or a
// generator matrix Q with zero row sums (continuous time), together with a
// nonnegative reference measure m of positive total mass. States with
// m_i = 0 are legal; they model null sets of the reference measure.
struct ChainModel {
  Kind kind = Kind::Discrete;
  std::vector<std::string> states;
  Eigen::MatrixXd kernel;  // P or Q, row-major semantics
  Eigen::VectorXd m;

  int size() const { return static_cast<int>(states.size()); }
  int state_index(const std::string& label) const;  // -1 if unknown
  bool m_positive() const { return m.minCoeff() > 0.0; }
};

// Probability vector over the model's states.
struct ProbMeasure {
  Eigen::VectorXd mu;

  int size() const { return static_cast<int>(mu.size()); }

  static ProbMeasure from_vector(Eigen::VectorXd mu, double tol = 1e-12);
  static ProbMeasure delta(int state, int n);
  static ProbMeasure uniform(int n);
};

// mu << m in the finite-state sense: mu_i > 0 implies m_i > 0.
bool absolutely_continuous(const ProbMeasure& mu, const Eigen::VectorXd& m);

// Indicator vector over states, entries in {0,1}.
struct StateSet {
  Eigen::VectorXd indicator;

  int size() const { return static_cast<int>(indicator.size()); }
  bool contains(int i) const { return indicator[i] != 0.0; }
  int count() const { return static_cast<int>(indicator.sum()); }
  std::vector<int> members() const;
  bool empty() const { return count() == 0; }

  static StateSet empty_set(int n);
  static StateSet from_indices(const std::vector<int>& idx, int n);
  static StateSet from_indicator(Eigen::VectorXd ind);

  friend bool operator==(const StateSet& a, const StateSet& b) {
    return a.indicator == b.indicator;
  }
};

// Union and subset tests on equal-length indicator sets.
StateSet set_union(const StateSet& a, const StateSet& b);
bool is_subset(const StateSet& a, const StateSet& b);

// Validates and assembles a model. Rejections name the offending row:
// non-stochastic rows, nonzero generator row sums, negative off-diagonal
// rates, and an all-zero or negative reference measure.
ChainModel build_model(Kind kind, const Eigen::MatrixXd& matrix,
                       const Eigen::VectorXd& m,
                       std::vector<std::string> labels = {});

// p_t: P^t for discrete models (t must be a nonnegative integer) and
// exp(t Q) for continuous ones. Entries in [-1e-12, 0) are clamped to 0.
Eigen::MatrixXd semigroup(const ChainModel& model, double t);

// One-resolvent: (I - Q)^{-1} in continuous time and the geometrically
// weighted sum of powers (P/2)(I - P/2)^{-1} in discrete time. Rows sum
// to 1 in both kinds.
Eigen::MatrixXd resolvent(const ChainModel& model);

struct ReversibilityReport {
  bool reversible = false;
  double max_violation = 0.0;  // max |m_i K_ij - m_j K_ji|
  int worst_i = -1, worst_j = -1;
};

// Detailed balance m_i K_ij = m_j K_ji within 1e-10, K = P or Q.
ReversibilityReport check_reversibility(const ChainModel& model);

// m^T P = m^T (discrete) or m^T Q = 0 (continuous) within 1e-10.
bool check_invariance(const ChainModel& model);

struct IrreducibilityReport {
  bool holds = false;
  // (i, j) pairs with m_i > 0, m_j > 0 but R[i][j] below the cutoff.
  std::vector<std::pair<int, int>> violations;
};

// Resolvent positivity between m-positive states; states with m_i = 0 are
// exempt. The cutoff defaults an order below accumulated inverse rounding.
IrreducibilityReport check_condition_114(const ChainModel& model,
                                         double positivity_cutoff = 1e-14);

}  // namespace occld
