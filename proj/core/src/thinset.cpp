#include "occld/thinset.hpp"

#include <cmath>

#include "occld/rate.hpp"
#include "occld/simulate.hpp"

namespace occld {

StateSet null_states(const ChainModel& model) {
  Eigen::VectorXd ind = Eigen::VectorXd::Zero(model.size());
  for (int i = 0; i < model.size(); ++i) {
    if (model.m[i] == 0.0) ind[i] = 1.0;
  }
  return StateSet{std::move(ind)};
}

StateSet thin_set(const ChainModel& model, const StateSet& B, double cutoff) {
  for (int i = 0; i < model.size(); ++i) {
    if (B.contains(i) && model.m[i] != 0.0) {
      throw ValidationError("set is not m-null: state " + model.states[i] +
                            " carries mass " + std::to_string(model.m[i]));
    }
  }
  const Eigen::VectorXd hit = resolvent(model) * B.indicator;
  Eigen::VectorXd ind = Eigen::VectorXd::Zero(model.size());
  for (int i = 0; i < model.size(); ++i) {
    if (hit[i] > cutoff) ind[i] = 1.0;
  }
  return StateSet{std::move(ind)};
}

StateSet thin_closure(const ChainModel& model, std::span<const StateSet> sets,
                      double cutoff) {
  StateSet out = StateSet::empty_set(model.size());
  for (const StateSet& B : sets) {
    out = set_union(out, thin_set(model, B, cutoff));
  }
  return out;
}

NullReachabilityReport null_reachability(const ChainModel& model,
                                         double cutoff) {
  NullReachabilityReport rep;
  const Eigen::MatrixXd R = resolvent(model);
  for (int i = 0; i < model.size(); ++i) {
    if (model.m[i] <= 0.0) continue;
    for (int j = 0; j < model.size(); ++j) {
      if (model.m[j] == 0.0 && R(i, j) > cutoff) {
        rep.reachable_pairs.emplace_back(i, j);
      }
    }
  }
  rep.null_unreachable_from_positive = rep.reachable_pairs.empty();
  return rep;
}

Example35Report example35_scenario(int cycle_size) {
  if (cycle_size < 3) throw ValidationError("the cycle needs k >= 3 states");
  const int k = cycle_size;
  const int n = k + 1;
  const int theta = k;

  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < k; ++i) {
    P(i, (i + 1) % k) += 0.5;
    P(i, (i + k - 1) % k) += 0.5;
  }
  P(theta, theta) = 1.0;

  Eigen::VectorXd m = Eigen::VectorXd::Constant(n, 1.0 / k);
  m[theta] = 0.0;

  std::vector<std::string> labels;
  for (int i = 0; i < k; ++i) labels.push_back("c" + std::to_string(i));
  labels.push_back("theta");

  Example35Report rep;
  rep.cycle_size = k;
  rep.theta = theta;
  rep.model = build_model(Kind::Discrete, P, m, std::move(labels));

  const ProbMeasure delta_theta = ProbMeasure::delta(theta, n);

  const RateResult hat = dv_rate_discrete(rep.model, delta_theta);
  rep.rate_hat_value = hat.value;
  rep.rate_hat_zero = std::abs(hat.value) <= 1e-10;

  rep.rate_I_infinite = rate_I(rep.model, delta_theta).is_infinite();

  const StateSet B = StateSet::from_indices({theta}, n);
  rep.thin = thin_set(rep.model, B);
  rep.thin_set_is_theta = rep.thin == B;

  // From theta the chain never leaves, so every step visits the target.
  rep.occupation_certain = true;
  for (int horizon : {1, 7, 50}) {
    const OccupationLaw law =
        occupation_law_exact(rep.model, theta, horizon, B);
    rep.occupation_certain =
        rep.occupation_certain && std::abs(law.pmf[horizon] - 1.0) <= 1e-12;
  }

  // From the cycle the visit count of theta is identically zero.
  rep.cycle_never_hits = true;
  for (int x = 0; x < k; ++x) {
    const OccupationLaw law = occupation_law_exact(rep.model, x, 50, B);
    rep.cycle_never_hits =
        rep.cycle_never_hits && std::abs(law.pmf[0] - 1.0) <= 1e-12;
  }

  rep.condition_64_holds = check_condition_114(rep.model).holds;
  return rep;
}

}  // namespace occld
