#ifndef BAYES_INVERT_ATAIS_HPP
#define BAYES_INVERT_ATAIS_HPP

#include "core.hpp"
#include "likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

namespace binv {

// ---------------------------------------------------------------------------
// proposals

struct GaussianProposal {};

struct StudentTProposal {
  double dof = 5.0;
};

using ProposalFamily = std::variant<GaussianProposal, StudentTProposal>;

struct Proposal {
  Vector mean;
  SpdMatrix cov;
};

inline double proposal_logpdf(const ProposalFamily& fam, const Vector& x, const Proposal& q) {
  if (const auto* t = std::get_if<StudentTProposal>(&fam)) {
    const double m = static_cast<double>(x.size());
    const double nu = t->dof;
    const double s = q.cov.quad_form(x - q.mean);
    return std::lgamma(0.5 * (nu + m)) - std::lgamma(0.5 * nu) - 0.5 * m * std::log(nu * M_PI) -
           0.5 * q.cov.log_det() - 0.5 * (nu + m) * std::log1p(s / nu);
  }
  return mvn_logpdf(x, q.mean, q.cov);
}

inline Vector proposal_sample(const ProposalFamily& fam, const Proposal& q, RngStream& rng) {
  Vector z = q.cov.lower() * rng.normal_vector(q.mean.size());
  if (const auto* t = std::get_if<StudentTProposal>(&fam)) z *= std::sqrt(t->dof / rng.chi_squared(t->dof));
  return q.mean + z;
}

// log of the mixture (1/|P|) sum_p q_p(x), or of the current proposal alone.
inline double log_denominator(const Vector& x, const std::vector<Proposal>& proposals, std::size_t current,
                              bool mixture, const ProposalFamily& fam = GaussianProposal{}) {
  if (proposals.empty()) throw InvalidArgument("empty proposal list");
  if (current >= proposals.size()) throw InvalidArgument("current proposal index out of range");
  if (!mixture) return proposal_logpdf(fam, x, proposals[current]);
  std::vector<double> lq(proposals.size());
  for (std::size_t i = 0; i < proposals.size(); ++i) lq[i] = proposal_logpdf(fam, x, proposals[i]);
  return log_sum_exp(lq) - std::log(static_cast<double>(proposals.size()));
}

inline std::vector<double> is_log_weights(const std::vector<Vector>& samples,
                                          const std::function<double(const Vector&)>& log_target,
                                          const std::vector<Proposal>& proposals, std::size_t current,
                                          bool mixture, const ProposalFamily& fam = GaussianProposal{}) {
  if (proposals.empty()) throw InvalidArgument("empty proposal list");
  std::vector<double> out(samples.size());
  for (std::size_t n = 0; n < samples.size(); ++n) {
    const double lt = log_target(samples[n]);
    out[n] = lt == kNegInf ? kNegInf : lt - log_denominator(samples[n], proposals, current, mixture, fam);
  }
  return out;
}

// ---------------------------------------------------------------------------
// config

struct StandardDenominator {};

struct MixtureDenominator {
  double epsilon = 0.3;
};

using WeightDenominator = std::variant<StandardDenominator, MixtureDenominator>;

enum class Retention { all, relevant };

enum class ResidualStorage { automatic, always };

struct AtaisConfig {
  Index N = 50;
  Index T = 50;
  Index T0 = 0;
  std::vector<Vector> initial_means;  // one per proposal, H = size
  Matrix initial_cov;
  std::optional<Matrix> initial_sigma;  // Sigma_ML^(0), identity when unset
  double delta0 = 1.0;
  double decay = 0.1;
  double delta_min = 1e-4;
  ProposalFamily proposal = GaussianProposal{};
  WeightDenominator denominator = StandardDenominator{};
  Retention retention = Retention::relevant;
  ResidualStorage residual_storage = ResidualStorage::automatic;

  Index H() const { return static_cast<Index>(initial_means.size()); }

  void validate(Index m, Index k) const {
    if (N < 1) throw InvalidConfig("N must be >= 1");
    if (T < 1) throw InvalidConfig("T must be >= 1");
    if (T0 < 0 || T0 >= T) throw InvalidConfig("warm-up T0 must satisfy 0 <= T0 < T");
    if (initial_means.empty()) throw InvalidConfig("at least one initial proposal mean is required");
    for (const auto& mu : initial_means)
      if (mu.size() != m) throw InvalidConfig("initial mean has wrong dimension");
    if (initial_cov.rows() != m || initial_cov.cols() != m) throw InvalidConfig("initial covariance has wrong dimension");
    if (initial_sigma && (initial_sigma->rows() != k || initial_sigma->cols() != k))
      throw InvalidConfig("initial Sigma has wrong dimension");
    if (!(delta_min > 0.0) || !(delta0 >= delta_min)) throw InvalidConfig("need delta0 >= delta_min > 0");
    if (!(decay > 0.0 && decay < 1.0)) throw InvalidConfig("decay a must lie in (0, 1)");
    if (const auto* mix = std::get_if<MixtureDenominator>(&denominator))
      if (!(mix->epsilon > 0.0 && mix->epsilon <= 1.0)) throw InvalidConfig("epsilon must lie in (0, 1]");
    if (const auto* t = std::get_if<StudentTProposal>(&proposal))
      if (!(t->dof > 0.0)) throw InvalidConfig("Student-t proposal dof must be positive");
  }
};

// ---------------------------------------------------------------------------
// store

struct StoredSample {
  Vector theta;
  Index proposal = 0;
  double log_weight = kNegInf;       // log w_t
  double log_target = kNegInf;       // log pi_t
  double log_denominator = 0.0;      // log q used in w_t
  double log_prior = 0.0;            // unpowered log g(theta)
  Matrix scatter;                    // sum_r e_r e_r' over the scored columns
  Index n_cols = 0;                  // number of scored columns
  Matrix residual;                   // K x n_cols, empty unless stored
};

struct IterationRecord {
  Index t = 0;
  std::vector<Proposal> proposals;
  SpdMatrix target_sigma;
  double prior_power = 1.0;
  std::vector<StoredSample> samples;
  std::vector<Index> columns;  // empty = all
};

struct SampleStore {
  std::vector<IterationRecord> iterations;
  std::vector<Vector> theta_map_history;
  std::vector<Matrix> sigma_ml_history;

  Index retained() const {
    Index n = 0;
    for (const auto& it : iterations) n += static_cast<Index>(it.samples.size());
    return n;
  }

  template <typename F>
  void for_each(F&& f) const {
    for (const auto& it : iterations)
      for (const auto& s : it.samples) f(it, s);
  }
};

struct AtaisOutput {
  Vector theta_map;
  SpdMatrix sigma_ml;
  double log_pi_map = kNegInf;
  SampleStore store;
  std::vector<double> corrected_log_weights;  // store order
  std::vector<double> delta;                  // delta_t used in Lambda_{t+1}
  std::vector<double> ess;                    // ESS(t); 0 for degenerate iterations
  std::vector<double> sigma_drift;            // ||Sigma^(t) - Sigma^(t-1)||_F
  std::uint64_t model_evaluations = 0;
  Index samples_drawn = 0;
  std::optional<Proposal> fused;  // mini-batch strategy 2 only
};

struct AtaisState {
  Vector theta_map;
  SpdMatrix sigma_ml;
  double log_pi_map = kNegInf;
  bool has_map = false;
  std::vector<Proposal> proposals;
  double delta = 1.0;
};

// ---------------------------------------------------------------------------
// steps

inline double adapt_delta(double delta, double delta0, double a, double delta_min) {
  return delta >= delta_min ? a * delta : delta0;
}

inline double ess(const std::vector<double>& w) {
  double s = 0.0;
  for (double x : w) s += x * x;
  if (!(s > 0.0)) throw DegenerateWeights("ess: all weights are zero");
  return 1.0 / s;
}

inline std::vector<Index> retain_relevant(const std::vector<double>& w, Index n) {
  std::vector<Index> keep;
  const double thr = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] >= thr) keep.push_back(static_cast<Index>(i));
  if (keep.empty() && !w.empty())  // rounding guard; the max weight is >= 1/n mathematically
    keep.push_back(static_cast<Index>(std::max_element(w.begin(), w.end()) - w.begin()));
  return keep;
}

// Index of the largest value, lowest index on ties; -1 when every value is -inf.
inline Index argmax_index(const std::vector<double>& v) {
  Index best = -1;
  double bv = kNegInf;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] > bv) {
      bv = v[i];
      best = static_cast<Index>(i);
    }
  return best;
}

inline std::pair<Vector, Matrix> current_max(const std::vector<Vector>& samples,
                                             const std::vector<double>& log_targets,
                                             const ForwardModel& model, const Dataset& data) {
  detail::require_dims(samples.size() == log_targets.size(), "current_max: size mismatch");
  const Index i = argmax_index(log_targets);
  if (i < 0) throw DegenerateWeights("current_max: all log-targets are -inf");
  return {samples[static_cast<std::size_t>(i)], ml_covariance(residuals(model, samples[static_cast<std::size_t>(i)], data))};
}

// Returns true when the state was updated. log_target_next evaluates the
// candidate's stored residuals under a new Sigma.
inline bool global_max_update(AtaisState& state, const Vector& theta_max, double log_target_max,
                              const Matrix& sigma_t,
                              const std::function<double(const SpdMatrix&)>& log_target_next) {
  if (!(log_target_max > state.log_pi_map)) return false;
  state.theta_map = theta_max;
  state.sigma_ml = SpdMatrix::from_matrix(sigma_t, JitterPolicy::escalate);
  state.log_pi_map = log_target_next(state.sigma_ml);
  state.has_map = true;
  return true;
}

inline Matrix weighted_covariance(const std::vector<Vector>& samples, const std::vector<double>& w) {
  detail::require_dims(!samples.empty() && samples.size() == w.size(), "weighted_covariance: size mismatch");
  const Index m = samples.front().size();
  Vector mean = Vector::Zero(m);
  for (std::size_t i = 0; i < samples.size(); ++i) mean += w[i] * samples[i];
  Matrix c = Matrix::Zero(m, m);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (w[i] == 0.0) continue;
    const Vector d = samples[i] - mean;
    c.noalias() += w[i] * d * d.transpose();
  }
  return 0.5 * (c + c.transpose());
}

inline Proposal adapt_proposal(const std::vector<Vector>& samples, const std::vector<double>& w,
                               const Vector& theta_map, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
  Matrix lam = weighted_covariance(samples, w);
  lam += delta * Matrix::Identity(lam.rows(), lam.cols());
  return Proposal{theta_map, SpdMatrix::from_matrix(lam, JitterPolicy::escalate)};
}

// ---------------------------------------------------------------------------
// scoring and reweighting over stored residuals

namespace detail {

inline double stored_loglik(const NoiseFamily& family, const StoredSample& s, const SpdMatrix& sigma) {
  if (s.log_prior == kNegInf) return kNegInf;
  if (const auto* t = std::get_if<StudentT>(&family)) {
    if (s.residual.cols() != s.n_cols || s.n_cols == 0)
      throw InvalidArgument("missing residual block for Student-t reweighting");
    return student_t_loglik(s.residual, sigma, t->dof);
  }
  if (s.residual.cols() > 0 && s.residual.cols() == s.n_cols) return gaussian_loglik(s.residual, sigma);
  if (s.scatter.size() == 0) throw InvalidArgument("missing residual block");
  return gaussian_loglik_scatter(s.scatter, s.n_cols, sigma);
}

}  // namespace detail

// log w~ = log w + log pi_{T+1} - log pi_t, both from stored residuals.
inline std::vector<double> final_reweight(const SampleStore& store, const SpdMatrix& sigma_final,
                                          const NoiseFamily& family, const LogPrior& /*prior*/) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(store.retained()));
  store.for_each([&](const IterationRecord&, const StoredSample& s) {
    if (s.log_weight == kNegInf || s.log_prior == kNegInf) {
      out.push_back(kNegInf);
      return;
    }
    // w_t / pi_t = 1/q, so only the new target needs the stored residuals
    const double next = detail::stored_loglik(family, s, sigma_final) + s.log_prior;
    out.push_back(s.log_weight - s.log_target + next);
  });
  return out;
}

// ---------------------------------------------------------------------------
// engine

namespace detail {

struct Scored {
  Vector theta;
  Index proposal = 0;
  double log_prior = kNegInf;
  double log_target = kNegInf;
  double log_denominator = 0.0;
  double log_weight = kNegInf;
  Matrix scatter;
  Matrix residual;
};

struct ScoreContext {
  const ForwardModel& model;
  const Dataset& data;  // possibly a column subset
  const LogPrior& prior;
  const NoiseFamily& family;
  const ProposalFamily& proposal_family;
  double prior_power = 1.0;
};

// Draw N samples per proposal and score them against pi under target_sigma.
inline std::vector<Scored> draw_and_score(const ScoreContext& ctx, const std::vector<Proposal>& current,
                                          const std::vector<Proposal>& mixture_pool, bool mixture, Index n,
                                          const SpdMatrix& target_sigma, const RngStream& iter_rng) {
  std::vector<Scored> out;
  out.reserve(current.size() * static_cast<std::size_t>(n));
  for (std::size_t h = 0; h < current.size(); ++h) {
    RngStream rng = iter_rng.child(h);
    for (Index i = 0; i < n; ++i) {
      Scored s;
      s.proposal = static_cast<Index>(h);
      s.theta = proposal_sample(ctx.proposal_family, current[h], rng);
      out.push_back(std::move(s));
    }
  }
  std::vector<Proposal> pool;
  if (mixture) {
    pool = mixture_pool;
    pool.insert(pool.end(), current.begin(), current.end());
  }
  for (auto& s : out) {
    s.log_prior = ctx.prior(s.theta);
    s.log_denominator = mixture ? log_denominator(s.theta, pool, 0, true, ctx.proposal_family)
                                : proposal_logpdf(ctx.proposal_family, s.theta, current[static_cast<std::size_t>(s.proposal)]);
    if (s.log_prior == kNegInf) continue;
    Matrix e = ctx.data.y() - ctx.model.predict(s.theta, ctx.data);
    const double ll = loglik(ctx.family, e, target_sigma);
    s.log_target = ll + ctx.prior_power * s.log_prior;
    if (s.log_target != kNegInf) s.log_weight = s.log_target - s.log_denominator;
    if (e.allFinite()) s.scatter = e * e.transpose();
    s.residual = std::move(e);
  }
  return out;
}

inline StoredSample to_stored(Scored&& s, bool keep_residual) {
  StoredSample st;
  st.theta = std::move(s.theta);
  st.proposal = s.proposal;
  st.log_weight = s.log_weight;
  st.log_target = s.log_target;
  st.log_denominator = s.log_denominator;
  st.log_prior = s.log_prior;
  st.scatter = std::move(s.scatter);
  st.n_cols = s.residual.cols();
  if (keep_residual) st.residual = std::move(s.residual);
  return st;
}

inline bool keep_residuals(const AtaisConfig& cfg, const NoiseFamily& family) {
  return cfg.residual_storage == ResidualStorage::always || !is_gaussian(family);
}

inline double relative_change(const Vector& now, const Vector& before) {
  const double scale = std::max({now.norm(), before.norm(), 1e-300});
  return (now - before).norm() / scale;
}

// Normalized weights of one proposal's samples inside an iteration.
inline std::pair<std::vector<Vector>, std::vector<double>> proposal_particles(const std::vector<Scored>& scored,
                                                                              Index h) {
  std::vector<Vector> xs;
  std::vector<double> lw;
  for (const auto& s : scored)
    if (s.proposal == h) {
      xs.push_back(s.theta);
      lw.push_back(s.log_weight);
    }
  if (log_sum_exp(lw) == kNegInf) return {{}, {}};
  return {std::move(xs), normalize_log_weights(lw)};
}

}  // namespace detail

// Iteration hook: which columns and prior power define pi_t.
struct IterationTarget {
  std::vector<Index> columns;  // empty = all
  double prior_power = 1.0;
};

namespace detail {

// Shared loop for plain ATAIS and mini-batch strategy 1.
inline AtaisOutput atais_loop(const AtaisConfig& cfg, const ForwardModel& model, const Dataset& data,
                              const LogPrior& prior, const NoiseFamily& family, const RngStream& rng,
                              const std::function<IterationTarget(Index)>& target_of) {
  const Index m = model.param_dim();
  const Index k = model.output_dim();
  cfg.validate(m, k);
  detail::require_dims(data.K() == k, "dataset K does not match model");
  const std::uint64_t eval0 = model.evaluations();
  const bool mixture = std::holds_alternative<MixtureDenominator>(cfg.denominator);
  const double eps = mixture ? std::get<MixtureDenominator>(cfg.denominator).epsilon : 1.0;
  const bool keep_res = keep_residuals(cfg, family);
  const Index h_count = cfg.H();

  AtaisState st;
  st.theta_map = cfg.initial_means.front();
  st.sigma_ml = SpdMatrix::from_matrix(cfg.initial_sigma ? *cfg.initial_sigma : Matrix::Identity(k, k),
                                       JitterPolicy::escalate);
  st.delta = cfg.delta0;
  const SpdMatrix init_cov = SpdMatrix::from_matrix(cfg.initial_cov, JitterPolicy::reject);
  for (const auto& mu : cfg.initial_means) st.proposals.push_back(Proposal{mu, init_cov});

  // per-proposal local MAP (value kept under the current Sigma)
  std::vector<Vector> local_theta(static_cast<std::size_t>(h_count));
  std::vector<StoredSample> local_best(static_cast<std::size_t>(h_count));
  std::vector<double> local_val(static_cast<std::size_t>(h_count), kNegInf);

  Matrix map_residual;
  double map_log_prior = 0.0;
  auto reexpress_locals = [&](double power) {
    for (Index h = 0; h < h_count; ++h) {
      auto& lb = local_best[static_cast<std::size_t>(h)];
      if (local_val[static_cast<std::size_t>(h)] == kNegInf) continue;
      local_val[static_cast<std::size_t>(h)] = loglik(family, lb.residual, st.sigma_ml) + power * lb.log_prior;
    }
  };

  std::vector<Proposal> pool;  // proposals admitted to the mixture denominator
  std::vector<Vector> prev_means;
  const SpdMatrix eye = SpdMatrix::identity(k);

  AtaisOutput out;
  for (Index t = 1; t <= cfg.T; ++t) {
    const IterationTarget tgt = target_of(t);
    const bool subset = !tgt.columns.empty();
    const Dataset sub = subset ? data.subset(tgt.columns) : Dataset();
    const Dataset& dview = subset ? sub : data;
    const bool warm = t <= cfg.T0;
    const double power = tgt.prior_power;
    const SpdMatrix target_sigma = warm ? eye : st.sigma_ml;
    ScoreContext ctx{model, dview, prior, family, cfg.proposal, tgt.prior_power};

    std::vector<Scored> scored = draw_and_score(ctx, st.proposals, pool, mixture, cfg.N, target_sigma,
                                                rng.child(static_cast<std::uint64_t>(t)));
    out.samples_drawn += static_cast<Index>(scored.size());

    std::vector<double> lw(scored.size()), lt(scored.size());
    for (std::size_t i = 0; i < scored.size(); ++i) {
      lw[i] = scored[i].log_weight;
      lt[i] = scored[i].log_target;
    }
    const bool degenerate = log_sum_exp(lw) == kNegInf;
    std::vector<double> wbar;
    if (!degenerate) {
      wbar = normalize_log_weights(lw);
      out.ess.push_back(ess(wbar));
    } else {
      out.ess.push_back(0.0);
    }

    const Matrix prev_sigma = st.sigma_ml.matrix();
    if (!degenerate) {
      // local maxima per proposal
      for (Index h = 0; h < h_count; ++h) {
        Index best = -1;
        for (std::size_t i = 0; i < scored.size(); ++i)
          if (scored[i].proposal == h && (best < 0 || lt[i] > lt[static_cast<std::size_t>(best)])) best = static_cast<Index>(i);
        if (best < 0 || lt[static_cast<std::size_t>(best)] == kNegInf) continue;
        const auto& cand = scored[static_cast<std::size_t>(best)];
        if (lt[static_cast<std::size_t>(best)] > local_val[static_cast<std::size_t>(h)]) {
          Scored copy = cand;
          local_best[static_cast<std::size_t>(h)] = to_stored(std::move(copy), true);
          local_theta[static_cast<std::size_t>(h)] = cand.theta;
          local_val[static_cast<std::size_t>(h)] = lt[static_cast<std::size_t>(best)];
        }
      }
      // global candidate over all proposals
      const Index gi = argmax_index(lt);
      const auto& cand = scored[static_cast<std::size_t>(gi)];
      if (lt[static_cast<std::size_t>(gi)] > st.log_pi_map) {
        if (warm) {
          // least-squares phase: Sigma stays at I, MAP tracked under the same target
          st.theta_map = cand.theta;
          st.log_pi_map = lt[static_cast<std::size_t>(gi)];
          st.has_map = true;
        } else {
          const Matrix sigma_t = sigma_estimate(family, cand.residual);
          global_max_update(st, cand.theta, lt[static_cast<std::size_t>(gi)], sigma_t, [&](const SpdMatrix& s) {
            return loglik(family, cand.residual, s) + power * cand.log_prior;
          });
          reexpress_locals(power);
        }
        map_residual = cand.residual;
        map_log_prior = cand.log_prior;
      }
    }
    if (t == cfg.T0 && st.has_map) {
      // end of warm-up: first ML covariance at the least-squares point
      st.sigma_ml = SpdMatrix::from_matrix(sigma_estimate(family, map_residual), JitterPolicy::escalate);
      st.log_pi_map = loglik(family, map_residual, st.sigma_ml) + power * map_log_prior;
      reexpress_locals(power);
    }

    // adaptation
    std::vector<Proposal> next(st.proposals.size());
    for (Index h = 0; h < h_count; ++h) {
      auto [xs, ws] = proposal_particles(scored, h);
      const Vector& mu = h_count == 1 ? (st.has_map ? st.theta_map : st.proposals[0].mean)
                                      : (local_val[static_cast<std::size_t>(h)] > kNegInf ? local_theta[static_cast<std::size_t>(h)]
                                                                                           : st.proposals[static_cast<std::size_t>(h)].mean);
      if (xs.empty())
        next[static_cast<std::size_t>(h)] = Proposal{mu, st.proposals[static_cast<std::size_t>(h)].cov};
      else
        next[static_cast<std::size_t>(h)] = adapt_proposal(xs, ws, mu, st.delta);
    }
    out.delta.push_back(st.delta);

    // retention
    IterationRecord rec;
    rec.t = t;
    rec.proposals = st.proposals;
    rec.target_sigma = target_sigma;
    rec.prior_power = tgt.prior_power;
    rec.columns = tgt.columns;
    if (!degenerate) {
      std::vector<Index> keep;
      if (cfg.retention == Retention::relevant) {
        keep = retain_relevant(wbar, static_cast<Index>(scored.size()));
      } else {
        for (std::size_t i = 0; i < scored.size(); ++i) keep.push_back(static_cast<Index>(i));
      }
      rec.samples.reserve(keep.size());
      for (Index i : keep) rec.samples.push_back(to_stored(std::move(scored[static_cast<std::size_t>(i)]), keep_res));
    }
    out.store.iterations.push_back(std::move(rec));

    // mixture pool bookkeeping: the proposals used at t join the pool for later
    // iterations unless their mean jumped by more than eps relative to t-1.
    if (mixture) {
      for (Index h = 0; h < h_count; ++h) {
        const auto& q = st.proposals[static_cast<std::size_t>(h)];
        const bool stable = !prev_means.empty() &&
                            relative_change(q.mean, prev_means[static_cast<std::size_t>(h)]) <= eps;
        if (stable) pool.push_back(q);
      }
      prev_means.clear();
      for (const auto& q : st.proposals) prev_means.push_back(q.mean);
    }

    st.proposals = std::move(next);
    st.delta = adapt_delta(st.delta, cfg.delta0, cfg.decay, cfg.delta_min);
    out.store.theta_map_history.push_back(st.theta_map);
    out.store.sigma_ml_history.push_back(st.sigma_ml.matrix());
    out.sigma_drift.push_back((st.sigma_ml.matrix() - prev_sigma).norm());
  }

  out.theta_map = st.theta_map;
  out.sigma_ml = st.sigma_ml;
  out.log_pi_map = st.log_pi_map;
  out.model_evaluations = model.evaluations() - eval0;
  return out;
}

}  // namespace detail

inline AtaisOutput run_atais(const AtaisConfig& cfg, const ForwardModel& model, const Dataset& data,
                             const LogPrior& prior, const NoiseFamily& family, const RngStream& rng) {
  AtaisOutput out =
      detail::atais_loop(cfg, model, data, prior, family, rng, [](Index) { return IterationTarget{}; });
  out.corrected_log_weights = final_reweight(out.store, out.sigma_ml, family, prior);
  return out;
}

// Normalized corrected weights in store order.
inline std::vector<double> corrected_weights(const AtaisOutput& out) {
  return normalize_log_weights(out.corrected_log_weights);
}

}  // namespace binv

#endif  // BAYES_INVERT_ATAIS_HPP
