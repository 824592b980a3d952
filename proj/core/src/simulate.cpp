#include "occld/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "occld/rate.hpp"
#include "occld/thinset.hpp"

namespace occld {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int require_integer_horizon(double horizon) {
  const double rounded = std::round(horizon);
  if (std::abs(horizon - rounded) > 1e-9 || rounded < 1.0) {
    throw ValidationError("discrete horizon must be a positive integer");
  }
  return static_cast<int>(rounded);
}

void check_start(const ChainModel& model, int start) {
  if (start < 0 || start >= model.size()) {
    throw ValidationError("start state out of range");
  }
}

// Runs fn(trial) for trial in [0, trials) across the requested workers and
// returns the per-trial values; the caller reduces them in index order, so
// the result does not depend on the scheduling.
std::vector<double> run_trials(std::uint64_t trials, int workers,
                               const std::function<double(std::uint64_t)>& fn) {
  std::vector<double> values(trials);
  workers = std::clamp(workers, 1, 64);
  if (workers == 1 || trials < 2) {
    for (std::uint64_t t = 0; t < trials; ++t) values[t] = fn(t);
    return values;
  }
  std::vector<std::thread> pool;
  const std::uint64_t chunk = (trials + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::uint64_t lo = w * chunk;
    const std::uint64_t hi = std::min(trials, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi]() {
      for (std::uint64_t t = lo; t < hi; ++t) values[t] = fn(t);
    });
  }
  for (auto& th : pool) th.join();
  return values;
}

McEstimate bernoulli_estimate(const std::vector<double>& values) {
  McEstimate est;
  est.trials = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  const double p = sum / static_cast<double>(values.size());
  est.estimate = p;
  est.std_error =
      std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(values.size()));
  est.effective_sample_size = static_cast<double>(values.size());
  return est;
}

McEstimate weighted_estimate(const std::vector<double>& values) {
  McEstimate est;
  est.trials = values.size();
  const double n = static_cast<double>(values.size());
  double sum = 0.0, sum_sq = 0.0;
  for (double v : values) {
    sum += v;
    sum_sq += v * v;
  }
  est.estimate = sum / n;
  const double var =
      n > 1 ? std::max(sum_sq - n * est.estimate * est.estimate, 0.0) / (n - 1)
            : 0.0;
  est.std_error = std::sqrt(var / n);
  est.effective_sample_size = sum_sq > 0.0 ? sum * sum / sum_sq : 0.0;
  return est;
}

}  // namespace

TauNeighborhood TauNeighborhood::make(
    std::vector<Eigen::VectorXd> test_functions, ProbMeasure center,
    double radius) {
  if (test_functions.empty()) {
    throw ValidationError("a neighborhood needs at least one test function");
  }
  if (!(radius > 0.0)) throw ValidationError("radius must be positive");
  for (const auto& f : test_functions) {
    if (f.size() != center.mu.size()) {
      throw ValidationError("test function length mismatch");
    }
    if (!f.allFinite()) throw ValidationError("test function must be bounded");
  }
  return TauNeighborhood{std::move(test_functions), std::move(center), radius};
}

bool in_neighborhood(const ProbMeasure& nu, const TauNeighborhood& nbhd) {
  for (const auto& f : nbhd.test_functions) {
    if (std::abs(f.dot(nu.mu) - f.dot(nbhd.center.mu)) >= nbhd.radius) {
      return false;
    }
  }
  return true;
}

PathSample sample_path(const ChainModel& model, int start, double horizon,
                       RngStream stream) {
  check_start(model, start);
  CounterRng rng(stream);

  PathSample path;
  path.kind = model.kind;
  path.start = start;
  path.stream = stream;
  path.horizon = horizon;

  if (model.kind == Kind::Discrete) {
    const int n = require_integer_horizon(horizon);
    path.states.resize(n);
    path.states[0] = start;
    for (int k = 1; k < n; ++k) {
      path.states[k] = rng.categorical(model.kernel.row(path.states[k - 1]));
    }
    return path;
  }

  if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
  const double lambda_raw = -model.kernel.diagonal().minCoeff();
  const double lambda = lambda_raw > 0.0 ? lambda_raw : 1.0;
  const int n = model.size();
  const Eigen::MatrixXd jump =
      Eigen::MatrixXd::Identity(n, n) + model.kernel / lambda;

  path.states.push_back(start);
  path.times.push_back(0.0);
  double t = 0.0;
  int cur = start;
  while (true) {
    t += rng.exponential(lambda);
    if (t >= horizon) break;
    cur = rng.categorical(jump.row(cur));
    path.states.push_back(cur);
    path.times.push_back(t);
  }
  return path;
}

PathSample shifted(const PathSample& path, int t0) {
  if (path.kind != Kind::Discrete) {
    throw ValidationError("re-indexing shift applies to discrete paths");
  }
  if (t0 < 0 || t0 >= static_cast<int>(path.states.size())) {
    throw ValidationError("shift exceeds path length");
  }
  PathSample out = path;
  out.states.assign(path.states.begin() + t0, path.states.end());
  out.start = out.states.front();
  out.horizon = static_cast<double>(out.states.size());
  return out;
}

ProbMeasure empirical_measure(const PathSample& path, int n_states) {
  Eigen::VectorXd occ = Eigen::VectorXd::Zero(n_states);
  if (path.kind == Kind::Discrete) {
    for (int s : path.states) occ[s] += 1.0;
    occ /= static_cast<double>(path.states.size());
  } else {
    for (size_t k = 0; k < path.states.size(); ++k) {
      const double t_end =
          k + 1 < path.times.size() ? path.times[k + 1] : path.horizon;
      occ[path.states[k]] += t_end - path.times[k];
    }
    occ /= path.horizon;
  }
  return ProbMeasure{std::move(occ)};
}

double path_integral(const PathSample& path, const Eigen::VectorXd& V) {
  if (path.kind != Kind::Continuous) {
    throw ValidationError("path integral applies to continuous paths");
  }
  double acc = 0.0;
  for (size_t k = 0; k < path.states.size(); ++k) {
    const double t_end =
        k + 1 < path.times.size() ? path.times[k + 1] : path.horizon;
    acc += (t_end - path.times[k]) * V[path.states[k]];
  }
  return acc;
}

double OccupationLaw::prob_at_least(double threshold) const {
  const int cmin = std::max(
      0, static_cast<int>(std::ceil(threshold * n - 1e-9)));
  double p = 0.0;
  for (int c = cmin; c <= n; ++c) p += pmf[c];
  return p;
}

double OccupationLaw::prob_in_band(double center, double eps) const {
  double p = 0.0;
  for (int c = 0; c <= n; ++c) {
    if (std::abs(static_cast<double>(c) / n - center) < eps) p += pmf[c];
  }
  return p;
}

OccupationLaw occupation_law_exact(const ChainModel& model, int start, int n,
                                   const StateSet& target, int cap) {
  if (model.kind != Kind::Discrete) {
    throw RouteError("exact occupation laws use the discrete kind");
  }
  check_start(model, start);
  if (n < 1) throw ValidationError("horizon must be >= 1");
  if (n > cap) {
    throw ValidationError("horizon " + std::to_string(n) +
                          " exceeds the DP cap " + std::to_string(cap));
  }
  const int ns = model.size();
  auto in_target = [&](int x) { return target.contains(x) ? 1 : 0; };

  // layer(x, c) = P(X_step = x, visits so far = c); visits count steps
  // 0..step inclusive.
  Eigen::MatrixXd layer = Eigen::MatrixXd::Zero(ns, n + 1);
  layer(start, in_target(start)) = 1.0;
  Eigen::MatrixXd next(ns, n + 1);
  for (int step = 1; step < n; ++step) {
    next.setZero();
    const int cmax = step;  // at most step+1 visits among steps 0..step
    for (int x = 0; x < ns; ++x) {
      for (int c = 0; c <= cmax; ++c) {
        const double mass = layer(x, c);
        if (mass == 0.0) continue;
        for (int y = 0; y < ns; ++y) {
          const double p = model.kernel(x, y);
          if (p > 0.0) next(y, c + in_target(y)) += mass * p;
        }
      }
    }
    layer.swap(next);
  }

  OccupationLaw law;
  law.start = start;
  law.n = n;
  law.target = target;
  law.pmf = layer.colwise().sum().transpose();
  return law;
}

EventSpec EventSpec::set_threshold(StateSet target, double threshold) {
  EventSpec e;
  e.type = Type::SetThreshold;
  e.target = std::move(target);
  e.threshold = threshold;
  return e;
}

EventSpec EventSpec::neighborhood(TauNeighborhood nbhd) {
  EventSpec e;
  e.type = Type::Neighborhood;
  e.nbhd = std::move(nbhd);
  return e;
}

bool EventSpec::holds(const ProbMeasure& occupation) const {
  if (type == Type::SetThreshold) {
    return target.indicator.dot(occupation.mu) >= threshold;
  }
  return in_neighborhood(occupation, nbhd);
}

bool EventSpec::exactly_auditable() const {
  if (type == Type::SetThreshold) return true;
  if (nbhd.test_functions.size() != 1) return false;
  const auto& f = nbhd.test_functions[0];
  for (int i = 0; i < f.size(); ++i) {
    if (f[i] != 0.0 && f[i] != 1.0) return false;
  }
  return true;
}

McEstimate mc_event_probability(const ChainModel& model, int start,
                                double horizon, const EventSpec& event,
                                std::uint64_t trials, std::uint64_t seed,
                                int workers) {
  if (trials == 0) throw ValidationError("trials must be positive");
  const int ns = model.size();
  const auto values = run_trials(trials, workers, [&](std::uint64_t t) {
    const PathSample path = sample_path(model, start, horizon, {seed, t});
    return event.holds(empirical_measure(path, ns)) ? 1.0 : 0.0;
  });
  return bernoulli_estimate(values);
}

McEstimate mc_probability(const ChainModel& model, int start, double horizon,
                          const TauNeighborhood& nbhd, std::uint64_t trials,
                          std::uint64_t seed, int workers) {
  return mc_event_probability(model, start, horizon,
                              EventSpec::neighborhood(nbhd), trials, seed,
                              workers);
}

McEstimate tilted_importance_event(const ChainModel& model, int start, int n,
                                   const EventSpec& event,
                                   const Eigen::VectorXd& u_star,
                                   std::uint64_t trials, std::uint64_t seed,
                                   int workers) {
  if (model.kind != Kind::Discrete) {
    throw RouteError("the tilted sampler runs on discrete models");
  }
  check_start(model, start);
  if (u_star.size() != model.size() || u_star.minCoeff() <= 0.0) {
    throw ValidationError("u_star must be strictly positive over all states");
  }

  const int ns = model.size();
  const Eigen::VectorXd pu = model.kernel * u_star;
  Eigen::MatrixXd q(ns, ns), log_ratio(ns, ns);
  for (int i = 0; i < ns; ++i) {
    for (int j = 0; j < ns; ++j) {
      q(i, j) = model.kernel(i, j) * u_star[j] / pu[i];
      log_ratio(i, j) =
          q(i, j) > 0.0 ? std::log(model.kernel(i, j)) - std::log(q(i, j))
                        : 0.0;
    }
  }

  const auto values = run_trials(trials, workers, [&](std::uint64_t t) {
    CounterRng rng({seed, t});
    Eigen::VectorXd occ = Eigen::VectorXd::Zero(ns);
    int cur = start;
    occ[cur] += 1.0;
    double logw = 0.0;
    for (int k = 1; k < n; ++k) {
      const int nxt = rng.categorical(q.row(cur));
      logw += log_ratio(cur, nxt);
      cur = nxt;
      occ[cur] += 1.0;
    }
    occ /= static_cast<double>(n);
    return event.holds(ProbMeasure{std::move(occ)}) ? std::exp(logw) : 0.0;
  });
  return weighted_estimate(values);
}

McEstimate tilted_importance_sampler(const ChainModel& model, int start,
                                     int n, const TauNeighborhood& nbhd,
                                     const Eigen::VectorXd& u_star,
                                     std::uint64_t trials, std::uint64_t seed,
                                     int workers) {
  return tilted_importance_event(model, start, n,
                                 EventSpec::neighborhood(nbhd), u_star,
                                 trials, seed, workers);
}

McEstimate mc_feynman_kac(const ChainModel& model, int start, double t,
                          const Eigen::VectorXd& V, const Eigen::VectorXd& g,
                          std::uint64_t trials, std::uint64_t seed,
                          int workers) {
  if (model.kind != Kind::Continuous) {
    throw RouteError("the Feynman-Kac functional uses continuous paths");
  }
  const auto values = run_trials(trials, workers, [&](std::uint64_t trial) {
    const PathSample path = sample_path(model, start, t, {seed, trial});
    return g[path.states.back()] * std::exp(-path_integral(path, V));
  });
  return weighted_estimate(values);
}

namespace {

SlopePoint event_probability(const ChainModel& model, int start, double n,
                             const EventSpec& event, const SlopeOptions& opts) {
  SlopePoint pt;
  pt.n = n;
  switch (opts.method) {
    case SlopeMethod::ExactDp: {
      if (model.kind != Kind::Discrete || !event.exactly_auditable()) {
        throw MethodMismatchError(
            "exact slopes need a single-set event on a discrete model");
      }
      const int steps = require_integer_horizon(n);
      if (event.type == EventSpec::Type::SetThreshold) {
        pt.p = occupation_law_exact(model, start, steps, event.target,
                                    opts.dp_cap)
                   .prob_at_least(event.threshold);
      } else {
        const auto& f = event.nbhd.test_functions[0];
        const StateSet set = StateSet::from_indicator(f);
        const double center = f.dot(event.nbhd.center.mu);
        pt.p = occupation_law_exact(model, start, steps, set, opts.dp_cap)
                   .prob_in_band(center, event.nbhd.radius);
      }
      pt.std_error = 0.0;
      break;
    }
    case SlopeMethod::MonteCarlo: {
      const McEstimate est = mc_event_probability(
          model, start, n, event, opts.trials, opts.seed, opts.workers);
      pt.p = est.estimate;
      pt.std_error = est.std_error;
      break;
    }
    case SlopeMethod::ImportanceSampling: {
      const McEstimate est = tilted_importance_event(
          model, start, require_integer_horizon(n), event, opts.u_star,
          opts.trials, opts.seed, opts.workers);
      pt.p = est.estimate;
      pt.std_error = est.std_error;
      break;
    }
  }
  return pt;
}

}  // namespace

SlopeResult decay_slope(const ChainModel& model, int start,
                        const EventSpec& event, std::span<const double> n_grid,
                        const SlopeOptions& opts) {
  if (n_grid.size() < 2) {
    throw ValidationError("the horizon grid needs at least two points");
  }
  for (size_t k = 0; k + 1 < n_grid.size(); ++k) {
    if (!(n_grid[k] < n_grid[k + 1])) {
      throw ValidationError("the horizon grid must increase");
    }
  }

  SlopeResult res;
  res.method = opts.method == SlopeMethod::ExactDp ? "exact"
               : opts.method == SlopeMethod::MonteCarlo
                   ? "mc"
                   : "importance-sampling";
  for (double n : n_grid) {
    res.probabilities.push_back(
        event_probability(model, start, n, event, opts));
  }

  for (const auto& pt : res.probabilities) {
    if (pt.p <= 0.0) {
      res.minus_infinity = true;
      res.first_zero_n = pt.n;
      break;
    }
  }
  if (res.minus_infinity) {
    res.slope = -kInf;
    return res;
  }

  // (log p_{2n} - log p_n)/n over doubling pairs; the largest pair is the
  // estimate, the rest are reported for trend inspection.
  bool found = false;
  for (size_t i = 0; i < res.probabilities.size(); ++i) {
    const double n = res.probabilities[i].n;
    for (size_t j = i + 1; j < res.probabilities.size(); ++j) {
      if (std::abs(res.probabilities[j].n - 2.0 * n) <= 1e-9 * (1.0 + n)) {
        SlopeEstimate est;
        est.n = n;
        est.slope =
            (std::log(res.probabilities[j].p) - std::log(res.probabilities[i].p)) /
            n;
        res.sequence.push_back(est);
        res.slope = est.slope;
        found = true;
      }
    }
  }
  if (!found) {
    throw ValidationError("the horizon grid has no doubling pair n, 2n");
  }
  return res;
}

namespace {

std::string bound_verdict(bool claimed, bool raw_pass) {
  if (claimed) return raw_pass ? "pass" : "fail";
  return raw_pass ? "excluded-pass" : "excluded-fail";
}

}  // namespace

BoundAudit bound_audit(const ChainModel& model, const TauNeighborhood& nbhd,
                       std::span<const double> n_grid,
                       const BoundAuditOptions& opts) {
  BoundAudit audit;
  const ProbMeasure& center = nbhd.center;

  const RateResult hat = model.kind == Kind::Discrete
                             ? dv_rate_discrete(model, center)
                             : dv_rate_continuous(model, center);
  const RateResult full = rate_I(model, center);
  audit.rate_hat = hat.value;
  audit.rate_I = full.value;

  const StateSet nulls = null_states(model);
  audit.thin =
      nulls.empty() ? StateSet::empty_set(model.size()) : thin_set(model, nulls);

  const EventSpec event = EventSpec::neighborhood(nbhd);
  const bool exact = model.kind == Kind::Discrete &&
                     event.exactly_auditable() && !opts.force_mc;
  SlopeOptions sopts;
  sopts.method = exact ? SlopeMethod::ExactDp : SlopeMethod::MonteCarlo;
  sopts.trials = opts.trials;
  sopts.seed = opts.seed;
  sopts.workers = opts.workers;
  sopts.dp_cap = opts.dp_cap;
  audit.method = exact ? "exact" : "mc";

  auto tol_for = [&](double rate) {
    return opts.tol_fraction * (std::isfinite(rate) ? rate : 0.0) +
           opts.tol_floor;
  };
  const double tol_hat = tol_for(audit.rate_hat);
  const double tol_I = tol_for(audit.rate_I);

  std::vector<int> starts = opts.starts;
  if (starts.empty()) {
    for (int x = 0; x < model.size(); ++x) starts.push_back(x);
  }

  audit.all_claimed_pass = true;
  for (int x : starts) {
    check_start(model, x);
    BoundAuditStart row;
    row.start = x;
    row.label = model.states[x];
    row.slope = decay_slope(model, x, event, n_grid, sopts);
    row.in_thin_set = audit.thin.contains(x);

    const bool vanished = row.slope.minus_infinity;
    const double slope = row.slope.slope;

    // limsup (1/n) log p_n <= -rate_hat holds for every start.
    const bool hat_pass = std::isinf(audit.rate_hat)
                              ? vanished
                              : (vanished || slope <= -audit.rate_hat + tol_hat);
    row.upper_rate_hat = hat_pass ? "pass" : "fail";

    // The I-rate bounds are claimed off the thin set only.
    const bool upper_I_raw = std::isinf(audit.rate_I)
                                 ? vanished
                                 : (vanished || slope <= -audit.rate_I + tol_I);
    const bool lower_raw =
        std::isinf(audit.rate_I) ? true : (!vanished && slope >= -audit.rate_I - tol_I);
    row.upper_rate_I = bound_verdict(!row.in_thin_set, upper_I_raw);
    row.lower_rate_I = bound_verdict(!row.in_thin_set, lower_raw);

    if (!hat_pass) audit.all_claimed_pass = false;
    if (!row.in_thin_set && (!upper_I_raw || !lower_raw)) {
      audit.all_claimed_pass = false;
    }
    audit.starts.push_back(std::move(row));
  }
  return audit;
}

}  // namespace occld
