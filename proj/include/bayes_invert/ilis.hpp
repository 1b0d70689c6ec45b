#ifndef BAYES_INVERT_ILIS_HPP
#define BAYES_INVERT_ILIS_HPP

// Layered IS competitor: Wishart draws for Sigma, an MH chain on theta for each
// draw, and a per-draw weight Z(Sigma) g(Sigma) / q(Sigma).

#include "mcmc.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <optional>
#include <vector>

namespace binv {

// Gelfand-Dey reciprocal estimate of log Z with a moment-matched Gaussian
// truncated to its 99% ellipsoid. log_targets are the unnormalized log values.
inline double estimate_log_z(const std::vector<Vector>& states, const std::vector<double>& log_targets) {
  if (states.size() != log_targets.size()) throw InvalidArgument("estimate_log_z: size mismatch");
  if (states.empty()) throw InvalidArgument("estimate_log_z: empty chain");
  const Index m = states.front().size();
  const auto n = static_cast<Index>(states.size());
  if (n < 2 * m) throw InvalidArgument("estimate_log_z needs at least 2M states");
  Vector mean = Vector::Zero(m);
  for (const auto& x : states) mean += x;
  mean /= static_cast<double>(n);
  Matrix cov = Matrix::Zero(m, m);
  for (const auto& x : states) cov.noalias() += (x - mean) * (x - mean).transpose();
  cov /= static_cast<double>(n);
  if (cov.cwiseAbs().maxCoeff() == 0.0) throw DegenerateWeights("estimate_log_z: chain has zero covariance");
  cov = 0.5 * (cov + cov.transpose()) + 1e-6 * Matrix::Identity(m, m);
  const SpdMatrix c = SpdMatrix::from_matrix(cov, JitterPolicy::escalate);
  const double radius = boost::math::quantile(boost::math::chi_squared(static_cast<double>(m)), 0.99);
  const double log_mass = std::log(0.99);
  std::vector<double> terms;
  terms.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Vector d = states[i] - mean;
    if (c.quad_form(d) > radius || log_targets[i] == kNegInf) {
      terms.push_back(kNegInf);
      continue;
    }
    terms.push_back(mvn_logpdf(states[i], mean, c) - log_mass - log_targets[i]);
  }
  const double lse = log_sum_exp(terms);
  if (lse == kNegInf) throw DegenerateWeights("estimate_log_z: no state inside the ellipsoid");
  return -(lse - std::log(static_cast<double>(n)));
}

struct IlisConfig {
  Index J = 10;
  Index T = 200;                  // states per chain including burn-in
  double burn_in_fraction = 0.2;  // leading share of each chain discarded
  WishartParams sigma_proposal;
  std::optional<WishartParams> sigma_prior;  // defaults to the proposal (gamma = Z)
  Matrix mh_cov;                  // theta random-walk covariance
  Vector theta0;                  // chain start

  Index burn_in() const { return static_cast<Index>(std::floor(burn_in_fraction * static_cast<double>(T))); }

  void validate(Index m, Index k) const {
    if (J < 1) throw InvalidConfig("ILIS J must be >= 1");
    if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) throw InvalidConfig("burn-in fraction must lie in [0, 1)");
    if (T - burn_in() < 2 * m) throw InvalidConfig("ILIS chains need at least 2M states after burn-in");
    if (sigma_proposal.dim() != k) throw InvalidConfig("Wishart proposal has wrong dimension");
    if (sigma_prior && sigma_prior->dim() != k) throw InvalidConfig("Wishart prior has wrong dimension");
    if (mh_cov.rows() != m || mh_cov.cols() != m) throw InvalidConfig("MH covariance has wrong dimension");
    if (theta0.size() != m) throw InvalidConfig("ILIS theta0 has wrong dimension");
  }
};

struct IlisOutput {
  std::vector<SpdMatrix> sigmas;
  std::vector<std::vector<Vector>> chains;  // post burn-in
  std::vector<double> log_z;
  std::vector<double> log_gamma;
  std::vector<double> gamma_bar;
  std::vector<double> acceptance;
  std::uint64_t model_evaluations = 0;

  // every state of chain j carries gamma_bar_j / (chain length)
  Vector theta_mean() const {
    Vector acc = Vector::Zero(chains.front().front().size());
    for (std::size_t j = 0; j < chains.size(); ++j) {
      Vector cm = Vector::Zero(acc.size());
      for (const auto& x : chains[j]) cm += x;
      acc += gamma_bar[j] * cm / static_cast<double>(chains[j].size());
    }
    return acc;
  }
  Matrix sigma_mean() const {
    Matrix acc = Matrix::Zero(sigmas.front().dim(), sigmas.front().dim());
    for (std::size_t j = 0; j < sigmas.size(); ++j) acc += gamma_bar[j] * sigmas[j].matrix();
    return acc;
  }
};

inline IlisOutput run_ilis(const IlisConfig& cfg, const ForwardModel& model, const Dataset& data,
                           const LogPrior& prior, const NoiseFamily& family, const RngStream& rng) {
  cfg.validate(model.param_dim(), model.output_dim());
  const std::uint64_t eval0 = model.evaluations();
  const WishartParams& g = cfg.sigma_prior ? *cfg.sigma_prior : cfg.sigma_proposal;
  const SpdMatrix mh_cov = SpdMatrix::from_matrix(cfg.mh_cov, JitterPolicy::reject);
  const Index burn = cfg.burn_in();
  IlisOutput out;
  for (Index j = 0; j < cfg.J; ++j) {
    RngStream sig_rng = rng.child(static_cast<std::uint64_t>(j), 0);
    RngStream chain_rng = rng.child(static_cast<std::uint64_t>(j), 1);
    const SpdMatrix sj = sample_wishart(cfg.sigma_proposal, sig_rng);
    auto target = [&](const Vector& th) {
      const double lp = prior(th);
      if (lp == kNegInf) return kNegInf;
      return loglik(family, residuals(model, th, data), sj) + lp;
    };
    ChainRecord c = mh_conditional(target, cfg.theta0, mh_cov, cfg.T, chain_rng);
    std::vector<Vector> kept(c.thetas.begin() + burn, c.thetas.end());
    std::vector<double> kept_lt(c.log_targets.begin() + burn, c.log_targets.end());
    const double lz = estimate_log_z(kept, kept_lt);
    out.sigmas.push_back(sj);
    out.chains.push_back(std::move(kept));
    out.log_z.push_back(lz);
    out.log_gamma.push_back(lz + wishart_logpdf(sj, g) - wishart_logpdf(sj, cfg.sigma_proposal));
    out.acceptance.push_back(c.theta_acceptance());
  }
  out.gamma_bar = normalize_log_weights(out.log_gamma);
  out.model_evaluations = model.evaluations() - eval0;
  return out;
}

}  // namespace binv

#endif  // BAYES_INVERT_ILIS_HPP
