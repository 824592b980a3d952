#pragma once

#include <span>
#include <utility>
#include <vector>

#include "occld/chain.hpp"

namespace occld {

// {i : m_i = 0}.
StateSet null_states(const ChainModel& model);

// The maximal exceptional set for an m-null B: {i : (R 1_B)_i > cutoff}
// with the kind-appropriate resolvent. Throws when B is not m-null.
StateSet thin_set(const ChainModel& model, const StateSet& B,
                  double cutoff = 1e-14);

// Union of thin_set over a family; contained in the thin set of the union
// of the underlying null sets.
StateSet thin_closure(const ChainModel& model, std::span<const StateSet> sets,
                      double cutoff = 1e-14);

struct NullReachabilityReport {
  // True when no m-positive state reaches an m-null state at positive
  // resolvent mass; exactly then every thin set is m-null.
  bool null_unreachable_from_positive = true;
  std::vector<std::pair<int, int>> reachable_pairs;  // (positive i, null j)
};

NullReachabilityReport null_reachability(const ChainModel& model,
                                         double cutoff = 1e-14);

// The executable exceptional-set scenario: a symmetric random walk on a
// k-cycle plus an isolated absorbing state theta carrying no reference
// mass. The six assertions certify that the theta start defeats the
// I-rate upper bound while everything else behaves.
struct Example35Report {
  int cycle_size = 0;
  ChainModel model;
  int theta = 0;  // index of the absorbing state

  bool rate_hat_zero = false;        // variational rate of delta_theta is 0
  bool rate_I_infinite = false;      // I(delta_theta) = +infinity
  bool thin_set_is_theta = false;    // thin_set({theta}) = {theta}
  bool occupation_certain = false;   // P^theta(L_n(theta) = 1) = 1
  bool cycle_never_hits = false;     // P^x(L_n(theta) > 0) = 0 off theta
  bool condition_64_holds = false;   // resolvent positivity on supp m

  double rate_hat_value = 0.0;
  StateSet thin;

  bool all_pass() const {
    return rate_hat_zero && rate_I_infinite && thin_set_is_theta &&
           occupation_certain && cycle_never_hits && condition_64_holds;
  }
};

Example35Report example35_scenario(int cycle_size);

}  // namespace occld
