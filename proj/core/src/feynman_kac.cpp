#include "occld/feynman_kac.hpp"

#include <cmath>
#include <sstream>

#include "occld/linalg.hpp"

namespace occld {

namespace {

void require_continuous(const ChainModel& model, const char* op) {
  if (model.kind != Kind::Continuous) {
    throw RouteError(std::string(op) + " requires a continuous model");
  }
}

bool symmetric_path(const ChainModel& model) {
  return check_reversibility(model).reversible && model.m_positive();
}

}  // namespace

D1Element construct_D1_element(const ChainModel& model,
                               const Eigen::VectorXd& u, double t0,
                               double eta) {
  require_continuous(model, "construct_D1_element");
  if (t0 <= 0.0) throw ValidationError("smoothing horizon t0 must be positive");
  if (eta < 0.0) throw ValidationError("pre-smoothing time must be >= 0");
  if (u.minCoeff() < 0.0) {
    throw ValidationError("smoothing input must be nonnegative");
  }

  const Eigen::VectorXd u_tilde =
      eta > 0.0 ? Eigen::VectorXd(semigroup(model, eta) * u) : u;

  // v = (1/t0) int_0^t0 p_s u~ ds with the integral taken exactly:
  // spectrally on the symmetric path, by the block exponential otherwise.
  Eigen::MatrixXd G;
  if (symmetric_path(model)) {
    G = linalg::integrate_expm_weighted_symmetric(model.kernel, model.m, t0);
  } else {
    G = linalg::integrate_expm(model.kernel, t0);
  }

  D1Element out;
  out.v = (G * u_tilde) / t0;
  out.Lhat_v = (semigroup(model, t0) * u_tilde - u_tilde) / t0;
  return out;
}

TiltSpec make_tilt(const ChainModel& model, const Eigen::VectorXd& u,
                   double t0, double eta, double epsilon) {
  if (epsilon <= 0.0) throw ValidationError("tilt epsilon must be positive");
  const D1Element el = construct_D1_element(model, u, t0, eta);

  TiltSpec tilt;
  tilt.v = el.v;
  tilt.Lhat_v = el.Lhat_v;
  tilt.epsilon = epsilon;
  tilt.t0 = t0;
  tilt.eta = eta;
  tilt.V = el.Lhat_v.array() / (el.v.array() + epsilon);

  const Eigen::VectorXd u_tilde =
      eta > 0.0 ? Eigen::VectorXd(semigroup(model, eta) * u) : u;
  const double cap =
      2.0 * u_tilde.cwiseAbs().maxCoeff() / (t0 * epsilon) + 1e-12;
  if (tilt.V.cwiseAbs().maxCoeff() > cap) {
    std::ostringstream os;
    os << "potential bound violated: ||V|| = " << tilt.V.cwiseAbs().maxCoeff()
       << " exceeds " << cap;
    throw ValidationError(os.str());
  }
  return tilt;
}

Eigen::MatrixXd tilted_semigroup(const ChainModel& model,
                                 const Eigen::VectorXd& V, double t) {
  require_continuous(model, "tilted_semigroup");
  if (t < 0.0) throw ValidationError("negative time");
  Eigen::MatrixXd A = model.kernel;
  A.diagonal() -= V;
  if (symmetric_path(model)) {
    // diag(V) commutes with the symmetrizing weights, so A inherits the
    // m-symmetry of Q.
    return linalg::expm_weighted_symmetric(A, model.m, t);
  }
  return linalg::expm(t * A);
}

double fk_identity_check(const ChainModel& model, const TiltSpec& tilt,
                         double t) {
  const Eigen::VectorXd veps = tilt.v_eps();
  const Eigen::MatrixXd pt = tilted_semigroup(model, tilt.V, t);
  return (veps - pt * veps).cwiseAbs().maxCoeff();
}

double tilted_invariance_check(const ChainModel& model, const TiltSpec& tilt,
                               double t) {
  require_continuous(model, "tilted_invariance_check");
  if (!check_reversibility(model).reversible) {
    throw RouteError("tilted invariance holds for symmetric semigroups only");
  }
  const Eigen::VectorXd weights = model.m.array() * tilt.v_eps().array();
  const Eigen::MatrixXd pt = tilted_semigroup(model, tilt.V, t);
  return (weights.transpose() * pt - weights.transpose()).cwiseAbs().sum();
}

double tilted_contraction_check(const ChainModel& model,
                                const Eigen::VectorXd& V, double t) {
  require_continuous(model, "tilted_contraction_check");
  if (!check_reversibility(model).reversible) {
    throw RouteError("the L2(m) contraction needs a reversible model");
  }

  // Restrict to supp m; detailed balance forbids transitions out of it,
  // so the restriction of the exponential is the exponential of the
  // restriction.
  std::vector<int> supp;
  for (int i = 0; i < model.size(); ++i) {
    if (model.m[i] > 0.0) supp.push_back(i);
  }
  const int s = static_cast<int>(supp.size());
  const Eigen::MatrixXd pt = tilted_semigroup(model, V, t);
  Eigen::MatrixXd sub(s, s);
  Eigen::VectorXd w(s);
  for (int a = 0; a < s; ++a) {
    w[a] = model.m[supp[a]];
    for (int b = 0; b < s; ++b) sub(a, b) = pt(supp[a], supp[b]);
  }
  return linalg::weighted_operator_norm(sub, w);
}

double tilted_contraction_check(const ChainModel& model, const TiltSpec& tilt,
                                double t) {
  return tilted_contraction_check(model, tilt.V, t);
}

}  // namespace occld
