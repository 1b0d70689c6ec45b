#ifndef BAYES_INVERT_MINIBATCH_HPP
#define BAYES_INVERT_MINIBATCH_HPP

#include "atais.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace binv {

enum class MinibatchStrategy { rescore, fusion };

// delta added to the per-batch covariance under fusion: delta_min, or the
// cyclic delta_t of that iteration.
enum class FusionDelta { minimum, schedule };

// One batch is consumed per iteration, so T equals the number of batches.
struct BatchPlan {
  Index L = 0;
  std::vector<std::vector<Index>> partition;
  MinibatchStrategy mode = MinibatchStrategy::rescore;
  FusionDelta fusion_delta = FusionDelta::minimum;

  Index batches() const { return static_cast<Index>(partition.size()); }

  void validate(Index r) const {
    if (L < 1) throw InvalidConfig("batch size L must be >= 1");
    if (partition.empty()) throw InvalidConfig("batch plan is empty");
    std::vector<char> seen(static_cast<std::size_t>(r), 0);
    for (const auto& b : partition) {
      if (static_cast<Index>(b.size()) != L) throw InvalidConfig("every batch must hold exactly L columns");
      for (Index c : b) {
        if (c < 0 || c >= r) throw InvalidConfig("batch column out of range");
        if (seen[static_cast<std::size_t>(c)]++) throw InvalidConfig("batches overlap");
      }
    }
    if (batches() * L != r) throw InvalidConfig("batches do not cover every column");
  }
};

// Seeded random permutation cut into R/L contiguous blocks.
inline BatchPlan make_batch_plan(Index r, Index l, MinibatchStrategy mode, RngStream& rng) {
  if (l < 1 || r % l != 0) throw InvalidConfig("R must be divisible by the batch size L");
  std::vector<Index> perm(static_cast<std::size_t>(r));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  BatchPlan plan;
  plan.L = l;
  plan.mode = mode;
  for (Index b = 0; b < r / l; ++b)
    plan.partition.emplace_back(perm.begin() + b * l, perm.begin() + (b + 1) * l);
  return plan;
}

// Log-likelihood over the batch columns plus prior_power * log g(theta).
inline double subposterior_logpdf(const Vector& theta, const std::vector<Index>& batch, const SpdMatrix& sigma,
                                  const ForwardModel& model, const Dataset& data, const LogPrior& prior,
                                  double prior_power, const NoiseFamily& family = Gaussian{}) {
  if (batch.empty()) throw InvalidArgument("subposterior_logpdf: empty batch");
  const double lp = prior(theta);
  if (lp == kNegInf) return kNegInf;
  const Dataset sub = data.subset(batch);
  return loglik(family, residuals(model, theta, sub), sigma) + prior_power * lp;
}

// Precision-weighted product of Gaussian factors.
inline Proposal gaussian_product(const std::vector<Vector>& means, const std::vector<SpdMatrix>& covs) {
  if (means.empty() || means.size() != covs.size()) throw InvalidArgument("gaussian_product: size mismatch");
  const Index m = means.front().size();
  Matrix prec = Matrix::Zero(m, m);
  Vector eta = Vector::Zero(m);
  for (std::size_t i = 0; i < means.size(); ++i) {
    detail::require_dims(means[i].size() == m && covs[i].dim() == m, "gaussian_product: dimension mismatch");
    prec += covs[i].inverse();
    eta += covs[i].solve(means[i]);
  }
  prec = 0.5 * (prec + prec.transpose());
  const SpdMatrix p = SpdMatrix::from_matrix(prec, JitterPolicy::escalate);
  const Matrix cov = p.inverse();
  return Proposal{p.solve(eta), SpdMatrix::from_matrix(0.5 * (cov + cov.transpose()), JitterPolicy::escalate)};
}

namespace detail {

// Replace the batch residual blocks of retained samples with full-data ones.
inline void rescore_full(SampleStore& store, const ForwardModel& model, const Dataset& data, bool keep_res) {
  for (auto& it : store.iterations) {
    for (auto& s : it.samples) {
      if (s.log_prior == kNegInf || s.log_weight == kNegInf) continue;
      Matrix e = data.y() - model.predict(s.theta, data);
      s.scatter = e.allFinite() ? Matrix(e * e.transpose()) : Matrix();
      s.n_cols = e.cols();
      if (keep_res) s.residual = std::move(e);
      else s.residual.resize(0, 0);
    }
  }
}

inline AtaisOutput minibatch_rescore(const AtaisConfig& cfg, const BatchPlan& plan, const ForwardModel& model,
                                     const Dataset& data, const LogPrior& prior, const NoiseFamily& family,
                                     const RngStream& rng) {
  const std::uint64_t eval0 = model.evaluations();
  AtaisOutput out = atais_loop(cfg, model, data, prior, family, rng, [&](Index t) {
    return IterationTarget{plan.partition[static_cast<std::size_t>(t - 1)], 1.0};
  });

  // one full-posterior pass over the per-iteration candidates, scored at their own ML Sigma
  double best = kNegInf;
  Vector best_theta = out.theta_map;
  Matrix best_res;
  const Vector* last = nullptr;
  for (const Vector& cand : out.store.theta_map_history) {
    if (last && cand == *last) continue;
    last = &cand;
    const double lp = prior(cand);
    if (lp == kNegInf) continue;
    const Matrix e = residuals(model, cand, data);
    if (!e.allFinite()) continue;
    const SpdMatrix s = SpdMatrix::from_matrix(sigma_estimate(family, e), JitterPolicy::escalate);
    const double v = loglik(family, e, s) + lp;
    if (v > best) {
      best = v;
      best_theta = cand;
      best_res = e;
    }
  }
  if (best == kNegInf) throw DegenerateWeights("mini-batch: no candidate has a finite full posterior");
  out.theta_map = best_theta;
  out.sigma_ml = SpdMatrix::from_matrix(sigma_estimate(family, best_res), JitterPolicy::escalate);
  out.log_pi_map = best;

  rescore_full(out.store, model, data, keep_residuals(cfg, family));
  out.corrected_log_weights = final_reweight(out.store, out.sigma_ml, family, prior);
  out.model_evaluations = model.evaluations() - eval0;
  return out;
}

inline AtaisOutput minibatch_fusion(const AtaisConfig& cfg, const BatchPlan& plan, const ForwardModel& model,
                                    const Dataset& data, const LogPrior& prior, const NoiseFamily& family,
                                    const RngStream& rng) {
  const Index k = model.output_dim();
  if (cfg.H() != 1) throw InvalidConfig("mini-batch fusion supports a single proposal");
  if (!std::holds_alternative<StandardDenominator>(cfg.denominator))
    throw InvalidConfig("mini-batch fusion supports the standard denominator only");
  const std::uint64_t eval0 = model.evaluations();
  const bool keep_res = keep_residuals(cfg, family);
  const double power = 1.0 / static_cast<double>(plan.batches());

  SpdMatrix sigma = SpdMatrix::from_matrix(cfg.initial_sigma ? *cfg.initial_sigma : Matrix::Identity(k, k),
                                           JitterPolicy::escalate);
  const SpdMatrix eye = SpdMatrix::identity(k);
  Proposal q{cfg.initial_means.front(), SpdMatrix::from_matrix(cfg.initial_cov, JitterPolicy::reject)};
  double delta = cfg.delta0;
  std::vector<Vector> batch_means;
  std::vector<SpdMatrix> batch_covs;
  std::optional<Proposal> fused;

  AtaisOutput out;
  for (Index t = 1; t <= cfg.T; ++t) {
    const auto& cols = plan.partition[static_cast<std::size_t>(t - 1)];
    const Dataset sub = data.subset(cols);
    const SpdMatrix target_sigma = t <= cfg.T0 ? eye : sigma;
    ScoreContext ctx{model, sub, prior, family, cfg.proposal, power};
    std::vector<Scored> scored =
        draw_and_score(ctx, {q}, {}, false, cfg.N, target_sigma, rng.child(static_cast<std::uint64_t>(t)));
    out.samples_drawn += static_cast<Index>(scored.size());

    std::vector<double> lw(scored.size()), lt(scored.size());
    std::vector<Vector> xs(scored.size());
    for (std::size_t i = 0; i < scored.size(); ++i) {
      lw[i] = scored[i].log_weight;
      lt[i] = scored[i].log_target;
      xs[i] = scored[i].theta;
    }
    const bool degenerate = log_sum_exp(lw) == kNegInf;
    const Matrix prev_sigma = sigma.matrix();
    std::vector<double> wbar;
    Proposal next = q;
    if (degenerate) {
      out.ess.push_back(0.0);
    } else {
      wbar = normalize_log_weights(lw);
      out.ess.push_back(ess(wbar));
      // per-batch Gaussian approximation of the sub-posterior
      const Vector theta_max = xs[static_cast<std::size_t>(argmax_index(lt))];
      const Proposal local = adapt_proposal(xs, wbar, theta_max, plan.fusion_delta == FusionDelta::schedule ? delta : cfg.delta_min);
      batch_means.push_back(local.mean);
      batch_covs.push_back(local.cov);
      fused = gaussian_product(batch_means, batch_covs);
      const Matrix e = residuals(model, fused->mean, data);
      if (e.allFinite()) sigma = SpdMatrix::from_matrix(sigma_estimate(family, e), JitterPolicy::escalate);
      next = adapt_proposal(xs, wbar, fused->mean, delta);
    }
    out.delta.push_back(delta);

    IterationRecord rec;
    rec.t = t;
    rec.proposals = {q};
    rec.target_sigma = target_sigma;
    rec.prior_power = power;
    rec.columns = cols;
    if (!degenerate) {
      std::vector<Index> keep;
      if (cfg.retention == Retention::relevant) {
        keep = retain_relevant(wbar, static_cast<Index>(scored.size()));
      } else {
        keep.resize(scored.size());
        std::iota(keep.begin(), keep.end(), Index{0});
      }
      for (Index i : keep) rec.samples.push_back(to_stored(std::move(scored[static_cast<std::size_t>(i)]), keep_res));
    }
    out.store.iterations.push_back(std::move(rec));

    q = std::move(next);
    delta = adapt_delta(delta, cfg.delta0, cfg.decay, cfg.delta_min);
    out.store.theta_map_history.push_back(fused ? fused->mean : q.mean);
    out.store.sigma_ml_history.push_back(sigma.matrix());
    out.sigma_drift.push_back((sigma.matrix() - prev_sigma).norm());
  }
  if (!fused) throw DegenerateWeights("mini-batch fusion: every iteration was degenerate");

  out.theta_map = fused->mean;
  out.sigma_ml = sigma;
  out.fused = fused;
  // the fused Gaussian stands in for the full conditional posterior
  out.store.for_each([&](const IterationRecord&, const StoredSample& s) {
    if (s.log_weight == kNegInf) {
      out.corrected_log_weights.push_back(kNegInf);
      return;
    }
    out.corrected_log_weights.push_back(mvn_logpdf(s.theta, fused->mean, fused->cov) - s.log_denominator);
  });
  const double lp = prior(fused->mean);
  const Matrix e = residuals(model, fused->mean, data);
  out.log_pi_map = lp == kNegInf ? kNegInf : loglik(family, e, sigma) + lp;
  out.model_evaluations = model.evaluations() - eval0;
  return out;
}

}  // namespace detail

inline AtaisOutput run_atais_minibatch(const AtaisConfig& cfg, const BatchPlan& plan, const ForwardModel& model,
                                       const Dataset& data, const LogPrior& prior, const NoiseFamily& family,
                                       const RngStream& rng) {
  plan.validate(data.R());
  if (cfg.T != plan.batches()) throw InvalidConfig("mini-batch ATAIS needs T equal to the number of batches");
  if (plan.mode == MinibatchStrategy::rescore) return detail::minibatch_rescore(cfg, plan, model, data, prior, family, rng);
  return detail::minibatch_fusion(cfg, plan, model, data, prior, family, rng);
}

}  // namespace binv

#endif  // BAYES_INVERT_MINIBATCH_HPP
