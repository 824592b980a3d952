#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "occld/chain.hpp"
#include "occld/rng.hpp"

namespace occld {

// Finitely many bounded test functions, a center, and a radius; membership
// is max_j |<f_j, nu> - <f_j, center>| < eps with strict inequality.
struct TauNeighborhood {
  std::vector<Eigen::VectorXd> test_functions;
  ProbMeasure center;
  double radius = 0.0;

  static TauNeighborhood make(std::vector<Eigen::VectorXd> test_functions,
                              ProbMeasure center, double radius);
};

bool in_neighborhood(const ProbMeasure& nu, const TauNeighborhood& nbhd);

// One sampled trajectory. Discrete kind: states at steps 0..n-1.
// Continuous kind: states[i] is occupied on [times[i], times[i+1]) and the
// last state until the horizon; times[0] = 0.
struct PathSample {
  Kind kind = Kind::Discrete;
  int start = 0;
  std::vector<int> states;
  std::vector<double> times;  // continuous kind only, strictly increasing
  double horizon = 0.0;
  RngStream stream;
};

// Discrete: n steps from P. Continuous: uniformization with rate
// Lambda = max_i(-Q_ii) (1 if Q = 0), jump kernel I + Q/Lambda,
// Exp(Lambda) holding times truncated at the horizon.
PathSample sample_path(const ChainModel& model, int start, double horizon,
                       RngStream stream);

// The time shift on paths, realized by re-indexing (discrete kind).
PathSample shifted(const PathSample& path, int t0);

// Occupation fractions: visit frequencies over steps 0..n-1, or
// time-weighted fractions for continuous paths.
ProbMeasure empirical_measure(const PathSample& path, int n_states);

// Path integral int_0^t V(X_s) ds along a continuous path.
double path_integral(const PathSample& path, const Eigen::VectorXd& V);

// Exact law of the visit count n L_n(A) from one start state, by forward
// dynamic programming over (state, count). pmf[c] = P(count = c), counts
// taken over steps 0..n-1.
struct OccupationLaw {
  int start = 0;
  int n = 0;
  StateSet target;
  Eigen::VectorXd pmf;  // length n+1

  // P(L_n(A) >= threshold), exact up to the count grid.
  double prob_at_least(double threshold) const;
  // P(|L_n(A) - center| < eps), strict inequality as in the tau-topology.
  double prob_in_band(double center, double eps) const;
};

OccupationLaw occupation_law_exact(const ChainModel& model, int start, int n,
                                   const StateSet& target, int cap = 2000);

// Event over occupation measures: either a single-set threshold
// {L_n(A) >= theta} (exactly auditable) or a tau-neighborhood.
struct EventSpec {
  enum class Type { SetThreshold, Neighborhood };
  Type type = Type::SetThreshold;
  StateSet target;
  double threshold = 0.0;
  TauNeighborhood nbhd;

  static EventSpec set_threshold(StateSet target, double threshold);
  static EventSpec neighborhood(TauNeighborhood nbhd);
  bool holds(const ProbMeasure& occupation) const;
  // A neighborhood with a single 0/1 test function reduces to a band over
  // one visit count, so the DP law audits it exactly.
  bool exactly_auditable() const;
};

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
  double effective_sample_size = 0.0;
};

// Plain Monte Carlo for P^x(L_horizon in N). Deterministic for a fixed
// seed independent of the worker count: per-trial counter streams, results
// reduced in trial-index order.
McEstimate mc_probability(const ChainModel& model, int start, double horizon,
                          const TauNeighborhood& nbhd, std::uint64_t trials,
                          std::uint64_t seed, int workers = 1);

McEstimate mc_event_probability(const ChainModel& model, int start,
                                double horizon, const EventSpec& event,
                                std::uint64_t trials, std::uint64_t seed,
                                int workers = 1);

// Importance sampling under the tilted kernel q*_ij = P_ij u*_j / (Pu*)_i,
// paths reweighted by prod P/q* along transitions; unbiased for the same
// probability as mc_probability.
McEstimate tilted_importance_sampler(const ChainModel& model, int start,
                                     int n, const TauNeighborhood& nbhd,
                                     const Eigen::VectorXd& u_star,
                                     std::uint64_t trials, std::uint64_t seed,
                                     int workers = 1);

McEstimate tilted_importance_event(const ChainModel& model, int start, int n,
                                   const EventSpec& event,
                                   const Eigen::VectorXd& u_star,
                                   std::uint64_t trials, std::uint64_t seed,
                                   int workers = 1);

// Monte Carlo value of E^x [ g(X_t) exp(-int_0^t V(X_s) ds) ] over
// uniformized paths.
McEstimate mc_feynman_kac(const ChainModel& model, int start, double t,
                          const Eigen::VectorXd& V, const Eigen::VectorXd& g,
                          std::uint64_t trials, std::uint64_t seed,
                          int workers = 1);

enum class SlopeMethod { ExactDp, MonteCarlo, ImportanceSampling };

struct SlopeOptions {
  SlopeMethod method = SlopeMethod::ExactDp;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  int workers = 1;
  Eigen::VectorXd u_star;  // importance sampling only
  int dp_cap = 2000;
};

struct SlopePoint {
  double n = 0;
  double p = 0.0;
  double std_error = 0.0;
};

struct SlopeEstimate {
  double n = 0;
  double slope = 0.0;  // (log p_{2n} - log p_n) / n
};

struct SlopeResult {
  double slope = 0.0;  // estimate at the largest usable n
  bool minus_infinity = false;
  double first_zero_n = -1.0;  // first grid point with p = 0, if any
  std::vector<SlopePoint> probabilities;
  std::vector<SlopeEstimate> sequence;
  std::string method;
};

// Decay-slope estimator (log p_{2n} - log p_n)/n over an increasing grid
// that contains doubling pairs; the ratio cancels the subexponential
// prefactor. Zero probabilities yield slope -infinity with the first
// vanishing n reported.
SlopeResult decay_slope(const ChainModel& model, int start,
                        const EventSpec& event, std::span<const double> n_grid,
                        const SlopeOptions& opts = {});

struct BoundAuditStart {
  int start = 0;
  std::string label;
  SlopeResult slope;
  bool in_thin_set = false;
  // Verdicts: "pass", "fail", "excluded" (start in the thin set, bound not
  // claimed there) or "n/a".
  std::string upper_rate_hat;
  std::string upper_rate_I;
  std::string lower_rate_I;
};

struct BoundAuditOptions {
  double tol_fraction = 0.1;   // tolerance as a fraction of the rate
  double tol_floor = 1e-9;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  int workers = 1;
  bool force_mc = false;
  int dp_cap = 2000;
  std::vector<int> starts;  // empty = every state
};

struct BoundAudit {
  double rate_hat = 0.0;  // variational rate of the center
  double rate_I = 0.0;    // +infinity when center not << m
  StateSet thin;          // exceptional set for the I-bounds
  std::vector<BoundAuditStart> starts;
  std::string method;
  bool all_claimed_pass = false;  // every non-excluded verdict passed
};

// Audits the decay of P^x(L in N) against the upper bounds (rate_hat for
// every start, rate_I off the thin set) and the lower bound (rate_I off
// the thin set), per start state. Discrete models with exactly auditable
// events use the DP law; otherwise Monte Carlo.
BoundAudit bound_audit(const ChainModel& model, const TauNeighborhood& nbhd,
                       std::span<const double> n_grid,
                       const BoundAuditOptions& opts = {});

}  // namespace occld
