#ifndef BAYES_INVERT_MCMC_HPP
#define BAYES_INVERT_MCMC_HPP

// Random-walk baselines on theta alone and on the joint (theta, Sigma) space.

#include "posterior.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

namespace binv {

// Metropolis rule in the log domain; -inf proposals are never accepted.
inline bool metropolis_accept(double log_ratio, RngStream& rng) {
  if (std::isnan(log_ratio) || log_ratio == kNegInf) return false;
  if (log_ratio >= 0.0) return true;
  return std::log(rng.uniform()) < log_ratio;
}

struct ChainRecord {
  std::vector<Vector> thetas;
  std::vector<Matrix> sigmas;  // empty for theta-only chains
  std::vector<double> log_targets;
  Index theta_proposed = 0;
  Index theta_accepted = 0;
  Index sigma_proposed = 0;
  Index sigma_accepted = 0;
  Index spd_rejections = 0;
  std::uint64_t model_evaluations = 0;

  Index length() const { return static_cast<Index>(thetas.size()); }
  double theta_acceptance() const {
    return theta_proposed ? static_cast<double>(theta_accepted) / static_cast<double>(theta_proposed) : 0.0;
  }
  double sigma_acceptance() const {
    return sigma_proposed ? static_cast<double>(sigma_accepted) / static_cast<double>(sigma_proposed) : 0.0;
  }
  // index of the highest-target state (first on ties)
  Index best() const { return argmax_index(log_targets); }
};

// Random-walk Gaussian MH on theta; the chain holds T states including init.
inline ChainRecord mh_conditional(const std::function<double(const Vector&)>& log_target, const Vector& init,
                                  const SpdMatrix& proposal_cov, Index T, RngStream& rng) {
  detail::require_dims(init.size() == proposal_cov.dim(), "mh_conditional: dimension mismatch");
  if (T < 1) throw InvalidArgument("chain length must be >= 1");
  double lt = log_target(init);
  if (lt == kNegInf || std::isnan(lt)) throw InvalidArgument("mh_conditional: init outside the target support");
  ChainRecord c;
  c.thetas.reserve(static_cast<std::size_t>(T));
  c.log_targets.reserve(static_cast<std::size_t>(T));
  Vector x = init;
  c.thetas.push_back(x);
  c.log_targets.push_back(lt);
  const Vector zero = Vector::Zero(init.size());
  for (Index s = 1; s < T; ++s) {
    const Vector y = x + mvn_sample(zero, proposal_cov, rng);
    const double ly = log_target(y);
    ++c.theta_proposed;
    if (metropolis_accept(ly - lt, rng)) {
      x = y;
      lt = ly;
      ++c.theta_accepted;
    }
    c.thetas.push_back(x);
    c.log_targets.push_back(lt);
  }
  return c;
}

// Joint posterior p(theta, Sigma | Y) up to a constant. The Sigma prior is flat
// on the SPD cone unless a Wishart prior is supplied.
struct JointTarget {
  const ForwardModel& model;
  const Dataset& data;
  const LogPrior& prior;
  NoiseFamily family = Gaussian{};
  std::optional<WishartParams> sigma_prior;

  double sigma_log_prior(const SpdMatrix& s) const { return sigma_prior ? wishart_logpdf(s, *sigma_prior) : 0.0; }
  double value(const Matrix& res, double lp, const SpdMatrix& s) const {
    if (lp == kNegInf) return kNegInf;
    return loglik(family, res, s) + lp + sigma_log_prior(s);
  }
};

namespace detail {

struct JointState {
  Vector theta;
  Matrix res;
  double lp = kNegInf;
  SpdMatrix sigma;
  double lt = kNegInf;
};

inline JointState joint_init(const JointTarget& tgt, const Vector& theta, const SpdMatrix& sigma) {
  JointState s{theta, Matrix(), tgt.prior(theta), sigma, kNegInf};
  if (s.lp == kNegInf) throw InvalidArgument("joint chain init outside the prior support");
  s.res = residuals(tgt.model, theta, tgt.data);
  s.lt = tgt.value(s.res, s.lp, sigma);
  if (s.lt == kNegInf) throw InvalidArgument("joint chain init has zero density");
  return s;
}

inline void push_state(ChainRecord& c, const JointState& s) {
  c.thetas.push_back(s.theta);
  c.sigmas.push_back(s.sigma.matrix());
  c.log_targets.push_back(s.lt);
}

// Wishart random walk centred at the current Sigma: Sigma' ~ W(nu, Sigma/nu).
inline double wishart_rw_logq(const SpdMatrix& to, const SpdMatrix& from, double nu) {
  return wishart_logpdf(to, WishartParams(nu, SpdMatrix::from_matrix(from.matrix() / nu, JitterPolicy::escalate)));
}

// One joint move: theta' ~ N(theta, cov), Sigma' ~ W(nu, Sigma/nu).
inline void joint_step(const JointTarget& tgt, JointState& st, const SpdMatrix& theta_cov, double nu,
                       bool wishart_correction, ChainRecord& c, RngStream& rng) {
  const Vector th = st.theta + mvn_sample(Vector::Zero(st.theta.size()), theta_cov, rng);
  const SpdMatrix sg =
      sample_wishart(WishartParams(nu, SpdMatrix::from_matrix(st.sigma.matrix() / nu, JitterPolicy::escalate)), rng);
  ++c.theta_proposed;
  ++c.sigma_proposed;
  const double lp = tgt.prior(th);
  if (lp == kNegInf) return;
  Matrix res = residuals(tgt.model, th, tgt.data);
  const double lt = tgt.value(res, lp, sg);
  double log_ratio = lt - st.lt;
  if (wishart_correction) log_ratio += wishart_rw_logq(st.sigma, sg, nu) - wishart_rw_logq(sg, st.sigma, nu);
  if (metropolis_accept(log_ratio, rng)) {
    st = JointState{th, std::move(res), lp, sg, lt};
    ++c.theta_accepted;
    ++c.sigma_accepted;
  }
}

}  // namespace detail

struct MhJointConfig {
  double a = 0.1;    // theta proposal covariance a I
  double nu = 5.0;   // Wishart random-walk dof (integer, >= K)
  Index T = 20000;   // states including the initial one
  bool wishart_correction = true;
};

inline ChainRecord mh_joint(const JointTarget& tgt, const Vector& theta0, const SpdMatrix& sigma0,
                            const MhJointConfig& cfg, RngStream& rng) {
  if (!(cfg.a > 0.0)) throw InvalidArgument("mh_joint: a must be positive");
  if (cfg.T < 1) throw InvalidArgument("chain length must be >= 1");
  const std::uint64_t eval0 = tgt.model.evaluations();
  const SpdMatrix cov = SpdMatrix::from_matrix(cfg.a * Matrix::Identity(theta0.size(), theta0.size()));
  ChainRecord c;
  detail::JointState st = detail::joint_init(tgt, theta0, sigma0);
  detail::push_state(c, st);
  for (Index s = 1; s < cfg.T; ++s) {
    detail::joint_step(tgt, st, cov, cfg.nu, cfg.wishart_correction, c, rng);
    detail::push_state(c, st);
  }
  c.model_evaluations = tgt.model.evaluations() - eval0;
  return c;
}

struct AdaptiveMhConfig {
  double nu = 5.0;
  Index T = 20000;
  Index update_every = 100;  // also the warm-up length, proposal I before it
  double floor = 1e-6;
};

inline ChainRecord adaptive_mh(const JointTarget& tgt, const Vector& theta0, const SpdMatrix& sigma0,
                               const AdaptiveMhConfig& cfg, RngStream& rng) {
  if (cfg.T < 1) throw InvalidArgument("chain length must be >= 1");
  if (cfg.update_every < 1 || cfg.update_every >= cfg.T) throw InvalidArgument("adaptive_mh: warm-up must be shorter than T");
  const std::uint64_t eval0 = tgt.model.evaluations();
  const Index m = theta0.size();
  SpdMatrix cov = SpdMatrix::identity(m);
  ChainRecord c;
  detail::JointState st = detail::joint_init(tgt, theta0, sigma0);
  detail::push_state(c, st);
  Vector sum = st.theta;
  Matrix sum_sq = st.theta * st.theta.transpose();
  for (Index s = 1; s < cfg.T; ++s) {
    if (s % cfg.update_every == 0) {
      const double n = static_cast<double>(c.length());
      const Vector mean = sum / n;
      Matrix emp = sum_sq / n - mean * mean.transpose();
      emp = 0.5 * (emp + emp.transpose());
      emp += cfg.floor * Matrix::Identity(m, m);
      cov = SpdMatrix::from_matrix(emp, JitterPolicy::escalate);
    }
    detail::joint_step(tgt, st, cov, cfg.nu, true, c, rng);
    detail::push_state(c, st);
    sum += st.theta;
    sum_sq.noalias() += st.theta * st.theta.transpose();
  }
  c.model_evaluations = tgt.model.evaluations() - eval0;
  return c;
}

struct MwgConfig {
  Index inner_steps = 10;
  Index T = 20000;          // outer iterations (states including the initial one)
  double theta_sd = 1.0;    // unit-variance theta proposal
  double sigma_sd = 0.1;    // per-entry perturbation of the upper triangle
};

// Theta block then Sigma block, each with inner_steps MH moves. Sigma moves reuse
// the residuals at the current theta, so only theta moves evaluate the model.
inline ChainRecord mh_within_gibbs(const JointTarget& tgt, const Vector& theta0, const SpdMatrix& sigma0,
                                   const MwgConfig& cfg, RngStream& rng) {
  if (cfg.inner_steps < 1) throw InvalidArgument("mh_within_gibbs: inner_steps must be >= 1");
  if (cfg.T < 1) throw InvalidArgument("chain length must be >= 1");
  const std::uint64_t eval0 = tgt.model.evaluations();
  const Index m = theta0.size();
  const Index k = sigma0.dim();
  const SpdMatrix cov = SpdMatrix::from_matrix(cfg.theta_sd * cfg.theta_sd * Matrix::Identity(m, m));
  ChainRecord c;
  detail::JointState st = detail::joint_init(tgt, theta0, sigma0);
  detail::push_state(c, st);
  for (Index s = 1; s < cfg.T; ++s) {
    for (Index i = 0; i < cfg.inner_steps; ++i) {
      const Vector th = st.theta + mvn_sample(Vector::Zero(m), cov, rng);
      ++c.theta_proposed;
      const double lp = tgt.prior(th);
      if (lp == kNegInf) continue;
      Matrix res = residuals(tgt.model, th, tgt.data);
      const double lt = tgt.value(res, lp, st.sigma);
      if (metropolis_accept(lt - st.lt, rng)) {
        st.theta = th;
        st.res = std::move(res);
        st.lp = lp;
        st.lt = lt;
        ++c.theta_accepted;
      }
    }
    for (Index i = 0; i < cfg.inner_steps; ++i) {
      Matrix p = st.sigma.matrix();
      for (Index a = 0; a < k; ++a)
        for (Index b = a; b < k; ++b) {
          p(a, b) += cfg.sigma_sd * rng.normal();
          p(b, a) = p(a, b);
        }
      ++c.sigma_proposed;
      SpdMatrix sg;
      try {
        sg = SpdMatrix::from_matrix(p, JitterPolicy::reject);
      } catch (const NotPositiveDefinite&) {
        ++c.spd_rejections;
        continue;
      }
      const double lt = tgt.value(st.res, st.lp, sg);
      if (metropolis_accept(lt - st.lt, rng)) {
        st.sigma = sg;
        st.lt = lt;
        ++c.sigma_accepted;
      }
    }
    detail::push_state(c, st);
  }
  c.model_evaluations = tgt.model.evaluations() - eval0;
  return c;
}

}  // namespace binv

#endif  // BAYES_INVERT_MCMC_HPP
